//! Descent of the quaternionic structure to the 4-dimensional quotient
//! `ker dμ / (G_S-orbit + fibre)` at points of `P`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_action::{infinitesimal, torus_act, KernelBasis};
use crate::grid::GridSpec;
use crate::moment::{self, MomentSpec, FRAME_SIGNS};
use crate::qalg::{fiber_act, left_real, ComplexSplit, Quaternion, UPoint};
use crate::toric_data::ConformalData;

/// Minimum transversality margin (relative to `Σ|q_i|²`) for a descent.
pub const MARGIN_THRESHOLD: f64 = 1e-6;
const RANK_TOL: f64 = 1e-9;

fn rank_of(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > RANK_TOL * top.max(f64::MIN_POSITIVE)).count()
}

/// Orthonormal basis of the column space, `None` if it is not `want`-dimensional.
/// Pivoted Gram–Schmidt with one reorthogonalization pass.
fn column_basis(m: &DMatrix<f64>, want: usize) -> Option<DMatrix<f64>> {
    if rank_of(m) != want {
        return None;
    }
    let mut rest: Vec<DVector<f64>> = m.column_iter().map(|c| c.into_owned()).collect();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(want);
    for _ in 0..want {
        let (pick, _) = rest
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        let mut v = rest.swap_remove(pick);
        for _ in 0..2 {
            for b in &basis {
                v -= b * b.dot(&v);
            }
        }
        let len = v.norm();
        if len == 0.0 {
            return None;
        }
        v /= len;
        for c in rest.iter_mut() {
            *c -= &v * v.dot(c);
        }
        basis.push(v);
    }
    Some(DMatrix::from_columns(&basis))
}

fn columns(vs: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    if vs.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(vs)
    }
}

fn fibre_directions(p: &UPoint) -> Vec<DVector<f64>> {
    let v = p.to_real();
    let mut out = vec![v.clone()];
    out.extend((1..=3).map(|a| left_real(a, &v).expect("axis in range")));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerticalSpace {
    /// `X(D_r)` followed by `p, I_1 p, I_2 p, I_3 p`, as columns.
    #[serde(skip)]
    pub basis: DMatrix<f64>,
    pub expected: usize,
    pub rank: usize,
    /// Rank of the full `T^k` orbit directions plus the fibre, out of `k + 4`.
    pub torus_rank: usize,
    pub torus_expected: usize,
}

impl VerticalSpace {
    /// `T^k` acts with a positive-dimensional stabilizer modulo the fibre.
    pub fn torus_degenerate(&self) -> bool {
        self.torus_rank < self.torus_expected
    }
}

/// The `G_S`-orbit and fibre directions at `p`. Errors when they fail to span
/// `(k − 2) + 4` dimensions.
pub fn vertical_space(p: &UPoint, d: &KernelBasis) -> Result<VerticalSpace> {
    let n = 4 * p.k();
    let mut vs: Vec<DVector<f64>> = d
        .to_f64()
        .iter()
        .map(|row| infinitesimal(row, p))
        .collect::<Result<_>>()?;
    vs.extend(fibre_directions(p));
    let basis = columns(&vs, n);
    let expected = d.dim() + 4;
    let rank = rank_of(&basis);

    let mut tv: Vec<DVector<f64>> = (0..p.k())
        .map(|i| infinitesimal(&unit(p.k(), i), p))
        .collect::<Result<_>>()?;
    tv.extend(fibre_directions(p));
    let torus_rank = rank_of(&columns(&tv, n));

    if rank < expected {
        return Err(Error::VerticalRankDeficient { rank, expected });
    }
    Ok(VerticalSpace {
        basis,
        expected,
        rank,
        torus_rank,
        torus_expected: p.k() + 4,
    })
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    (0..k).map(|j| f64::from(u8::from(i == j))).collect()
}

/// Quotient basis and descended endomorphisms at one point.
#[derive(Debug, Clone)]
pub struct DescendedFrame {
    pub point: UPoint,
    /// `4k × 4` orthonormal columns spanning `K ∩ V^⊥`.
    pub basis: DMatrix<f64>,
    pub endos: [DMatrix<f64>; 3],
    /// Smallest singular value of `dμ` on `C`, relative to `Σ|q_i|²`.
    pub margin: f64,
    pub kernel_dim: usize,
    projector: DMatrix<f64>,
}

impl DescendedFrame {
    /// `max(‖Î_a² + 1‖, ‖Î_1 Î_2 − Î_3‖, ‖Î_2 Î_3 − Î_1‖, ‖Î_3 Î_1 − Î_2‖)`.
    pub fn relation_residual(&self) -> f64 {
        quaternion_residual(&self.endos)
    }

    /// Coordinates of `Π L_a v` for `v` in the span of `other`, expressed in
    /// this frame's basis. Used to compare frames.
    fn descend_columns(&self, axis: usize, cols: &DMatrix<f64>) -> DMatrix<f64> {
        let lifted = DMatrix::from_columns(
            &cols
                .column_iter()
                .map(|c| left_real(axis as u8 + 1, &c.into_owned()).expect("axis in range"))
                .collect::<Vec<_>>(),
        );
        self.basis.transpose() * (&self.projector * lifted)
    }
}

pub fn quaternion_residual(e: &[DMatrix<f64>; 3]) -> f64 {
    let id = DMatrix::<f64>::identity(e[0].nrows(), e[0].ncols());
    let mut worst: f64 = 0.0;
    for m in e {
        worst = worst.max((m * m + &id).amax());
    }
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        worst = worst.max((&e[a] * &e[b] - &e[c]).amax());
    }
    worst
}

/// `K = ker dμ_p`, `C = span{I_a X(D_r)}`, `Π` the projection onto `K` along
/// `C`, and `Î_a = Qᵀ Π I_a Q` on an orthonormal `Q` spanning `K ∩ V^⊥`.
#[allow(non_snake_case)]
pub fn descend_H(p: &UPoint, spec: &MomentSpec) -> Result<DescendedFrame> {
    let k = p.k();
    let n = 4 * k;
    let scale = p.norm_sqr();
    if scale == 0.0 {
        return Err(Error::Input("cannot descend at the origin".into()));
    }
    let j = moment::dmu(p, spec);

    // kernel of dμ: orthogonal complement of the row space
    let sv = j.singular_values();
    let top = sv.max();
    let rank = sv.iter().filter(|&&s| s * s > 1e-12 * (top * top).max(f64::MIN_POSITIVE)).count();
    let row_space = column_basis(&j.transpose(), rank).ok_or(Error::RankDeficient(rank))?;
    let complement = DMatrix::<f64>::identity(n, n) - &row_space * row_space.transpose();
    let kernel_dim = n - row_space.ncols();
    if kernel_dim != k + 6 {
        return Err(Error::KernelDimension { got: kernel_dim, expected: k + 6 });
    }
    let kmat = column_basis(&complement, kernel_dim).ok_or(Error::KernelDimension { got: rank_of(&complement), expected: kernel_dim })?;

    let xs: Vec<DVector<f64>> = spec.d.to_f64().iter().map(|d| infinitesimal(d, p)).collect::<Result<_>>()?;
    let mut cvecs = Vec::with_capacity(3 * xs.len());
    for a in 1..=3 {
        for x in &xs {
            cvecs.push(left_real(a, x)?);
        }
    }
    let c = columns(&cvecs, n);
    let jc = &j * &c;
    let margin = if jc.is_empty() { 0.0 } else { jc.singular_values().min() / scale };
    if !(margin >= MARGIN_THRESHOLD) {
        return Err(Error::IllConditioned { margin, threshold: MARGIN_THRESHOLD });
    }
    let jc_inv = jc.try_inverse().ok_or(Error::IllConditioned { margin: 0.0, threshold: MARGIN_THRESHOLD })?;
    let projector = DMatrix::<f64>::identity(n, n) - &c * jc_inv * &j;

    let v = vertical_space(p, &spec.d)?;
    let vbasis = column_basis(&v.basis, v.expected).ok_or(Error::VerticalRankDeficient {
        rank: v.rank,
        expected: v.expected,
    })?;
    let off_v = &kmat - &vbasis * (vbasis.transpose() * &kmat);
    let q = column_basis(&off_v, 4).ok_or(Error::KernelDimension { got: rank_of(&off_v), expected: 4 })?;

    let mut frame = DescendedFrame {
        point: p.clone(),
        basis: q.clone(),
        endos: [DMatrix::zeros(4, 4), DMatrix::zeros(4, 4), DMatrix::zeros(4, 4)],
        margin,
        kernel_dim,
        projector,
    };
    frame.endos = [0, 1, 2].map(|a| frame.descend_columns(a, &q));
    Ok(frame)
}

/// Gram matrix `G` with `{w, Î_1 w, Î_2 w, Î_3 w}` orthonormal, `w` the first
/// basis vector.
pub fn conformal_rep(frame: &DescendedFrame) -> Result<DMatrix<f64>> {
    conformal_gram(&frame.endos, &DVector::from_fn(4, |i, _| f64::from(u8::from(i == 0))))
}

pub fn conformal_gram(endos: &[DMatrix<f64>; 3], w: &DVector<f64>) -> Result<DMatrix<f64>> {
    let e = DMatrix::from_columns(&[w.clone(), &endos[0] * w, &endos[1] * w, &endos[2] * w]);
    let inv = e
        .try_inverse()
        .ok_or_else(|| Error::Input("w, I1 w, I2 w, I3 w are dependent".into()))?;
    Ok(inv.transpose() * inv)
}

/// `‖Gᵃ/tr Gᵃ − Gᵇ/tr Gᵇ‖_∞`: distance between conformal classes.
pub fn conformal_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a / a.trace() - b / b.trace()).amax()
}

/// The complex structure `Σ ν_{1,a} ε_a Î_a / ‖ν_1‖` singled out by `ν_1`.
pub fn descend_nu1(p: &UPoint, frame: &DescendedFrame) -> Result<DMatrix<f64>> {
    let q1 = p.coords.first().ok_or(Error::FixedPointExcluded)?;
    if q1.norm_sqr() == 0.0 {
        return Err(Error::FixedPointExcluded);
    }
    let n = moment::nu_slot(*q1);
    let len = n.norm();
    let c = n.arr();
    Ok((0..3).fold(DMatrix::zeros(4, 4), |acc, a| acc + &frame.endos[a] * (c[a] * FRAME_SIGNS[a] / len)))
}

/// Change of quotient coordinates from `other` to `frame` at the same point.
fn transition(frame: &DescendedFrame, other_basis: &DMatrix<f64>) -> DMatrix<f64> {
    frame.basis.transpose() * other_basis
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceCheck {
    /// `max_a ‖Î'_a − P⁻¹ Î_a P‖`.
    pub conjugation_residual: f64,
    pub conformal_distance: f64,
}

/// Re-descend using a skewed complement of `V` in `K` (random mix of vertical
/// directions added to the quotient basis) and compare with `frame`.
pub fn choice_independence(frame: &DescendedFrame, spec: &MomentSpec, seed: u64) -> Result<ChoiceCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = vertical_space(&frame.point, &spec.d)?;
    let mix = DMatrix::from_fn(v.basis.ncols(), 4, |_, _| rng.gen_range(-1.0..1.0));
    let twist = DMatrix::from_fn(4, 4, |i, j| f64::from(u8::from(i == j)) + rng.gen_range(-0.5..0.5));
    let alt = &frame.basis * &twist + &v.basis * mix;

    let pm = transition(frame, &alt);
    let pinv = pm.clone().try_inverse().ok_or_else(|| Error::Input("degenerate alternative basis".into()))?;
    let alt_endos = [0, 1, 2].map(|a| &pinv * frame.descend_columns(a, &alt));
    let conjugation_residual = (0..3)
        .map(|a| (&alt_endos[a] - &pinv * &frame.endos[a] * &pm).amax())
        .fold(0.0, f64::max);

    // the conformal class pulled back by the change of basis
    let g = conformal_rep(frame)?;
    let g_alt = conformal_gram(&alt_endos, &DVector::from_fn(4, |i, _| f64::from(u8::from(i == 0))))?;
    let g_pulled = pm.transpose() * &g * &pm;
    Ok(ChoiceCheck {
        conjugation_residual,
        conformal_distance: conformal_distance(&g_pulled, &g_alt),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceCheck {
    /// `max_a ‖Î'_a − P Î_a P⁻¹‖` with `P = Q'ᵀ R_t Q`.
    pub conjugation_residual: f64,
    pub conformal_distance: f64,
}

/// Flow `p` by the torus element `exp(t)`, descend again and compare through
/// the differential of the flow.
pub fn torus_invariance(frame: &DescendedFrame, spec: &MomentSpec, t: &[f64]) -> Result<InvarianceCheck> {
    let p2 = torus_act(t, &frame.point)?;
    let frame2 = descend_H(&p2, spec)?;
    // R_t is linear; push the basis columns forward
    let pushed = DMatrix::from_columns(
        &frame
            .basis
            .column_iter()
            .map(|c| torus_act(t, &UPoint::from_real(&c.into_owned())).map(|u| u.to_real()))
            .collect::<Result<Vec<_>>>()?,
    );
    let pm = transition(&frame2, &pushed);
    let pinv = pm.clone().try_inverse().ok_or_else(|| Error::Input("torus flow degenerated the frame".into()))?;
    let conjugation_residual = (0..3)
        .map(|a| (&frame2.endos[a] - &pm * &frame.endos[a] * &pinv).amax())
        .fold(0.0, f64::max);
    let g = conformal_rep(frame)?;
    let g2 = conformal_rep(&frame2)?;
    let g_pushed = pinv.transpose() * g * &pinv;
    Ok(InvarianceCheck {
        conjugation_residual,
        conformal_distance: conformal_distance(&g_pushed, &g2),
    })
}

/// A random point of `P`: an orbit label drawn from `grid`'s window, moved by
/// a random torus element and a random fibre element.
pub fn random_point(r: &ConformalData, grid: &GridSpec, rng: &mut ChaCha8Rng) -> Result<UPoint> {
    let x = rng.gen_range(grid.x_min..grid.x_max);
    let y = rng.gen_range(0.05 * grid.y_max..grid.y_max);
    let base = moment::orbit_point(r, x, y)?;
    let t: Vec<f64> = (0..r.k()).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let c = Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    let c = if c.norm() < 0.1 { Quaternion::ONE } else { c };
    fiber_act(c, &torus_act(&t, &base)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentSample {
    pub index: usize,
    pub relation_residual: f64,
    pub gram_orthogonality: f64,
    pub nu1_residual: Option<f64>,
    /// Largest of the conjugation and conformal-class residuals under a change of quotient basis.
    pub choice_residual: f64,
    /// Same under a torus flow; `None` when the moved point is ill-conditioned.
    pub invariance_residual: Option<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentReport {
    pub samples: Vec<DescentSample>,
    pub max_residual: f64,
    pub max_choice_residual: f64,
    pub max_invariance_residual: f64,
    pub skipped: usize,
    pub accepted: usize,
}

/// Descend at `n` seeded random points of `P`; ill-conditioned ones are skipped.
pub fn descent_report(r: &ConformalData, spec: &MomentSpec, n: usize, seed: u64) -> Result<DescentReport> {
    use rayon::prelude::*;
    let grid = GridSpec::around(r, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<UPoint> = (0..n).map(|_| random_point(r, &grid, &mut rng)).collect::<Result<_>>()?;
    let outcomes: Vec<Result<Option<DescentSample>>> = points
        .par_iter()
        .enumerate()
        .map(|(index, p)| match descend_H(p, spec) {
            Ok(frame) => {
                let g = conformal_rep(&frame)?;
                let gram_orthogonality = frame
                    .endos
                    .iter()
                    .map(|e| (e.transpose() * &g * e - &g).amax())
                    .fold(0.0, f64::max);
                let nu1_residual = descend_nu1(p, &frame)
                    .ok()
                    .map(|j| (&j * &j + DMatrix::<f64>::identity(4, 4)).amax());
                let choice = choice_independence(&frame, spec, seed ^ index as u64)?;
                let flow: Vec<f64> = (0..p.k()).map(|i| 0.1 * (i as f64 + 1.0)).collect();
                let invariance_residual = match torus_invariance(&frame, spec, &flow) {
                    Ok(c) => Some(c.conjugation_residual.max(c.conformal_distance)),
                    Err(Error::IllConditioned { .. }) => None,
                    Err(e) => return Err(e),
                };
                Ok(Some(DescentSample {
                    index,
                    relation_residual: frame.relation_residual(),
                    gram_orthogonality,
                    nu1_residual,
                    choice_residual: choice.conjugation_residual.max(choice.conformal_distance),
                    invariance_residual,
                    margin: frame.margin,
                }))
            }
            Err(Error::IllConditioned { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut samples = Vec::new();
    let mut skipped = 0;
    for o in outcomes {
        match o? {
            Some(s) => samples.push(s),
            None => skipped += 1,
        }
    }
    let max_residual = samples
        .iter()
        .map(|s| s.relation_residual.max(s.gram_orthogonality).max(s.nu1_residual.unwrap_or(0.0)))
        .fold(0.0, f64::max);
    let max_choice_residual = samples.iter().map(|s| s.choice_residual).fold(0.0, f64::max);
    let max_invariance_residual = samples
        .iter()
        .filter_map(|s| s.invariance_residual)
        .fold(0.0, f64::max);
    Ok(DescentReport {
        accepted: samples.len(),
        samples,
        max_residual,
        max_choice_residual,
        max_invariance_residual,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub index: usize,
    pub samples: usize,
    /// `max ‖μ‖ / Σ|q_i|²` over samples.
    pub max_mu: f64,
    pub all_in_p: bool,
    pub slot_vanishes: bool,
    /// Singular values of `d ↦ X(d)` on `R^k` at the first sample, descending.
    pub torus_singular_values: Vec<f64>,
    pub stabilizer_directions: usize,
    /// `(k + 4) − rank(T^k orbit + fibre)`; 2 when all of `F` fixes the point.
    pub torus_fibre_deficiency: usize,
}

/// The point of `P` with `q_i = 0`: `𝐲 = −p_i 𝐱` for `i ≥ 2`, `𝐱 = 0` for
/// `i = 1`, so every target lies along one axis.
pub fn fixed_point(r: &ConformalData, i: usize) -> Result<UPoint> {
    let k = r.k();
    if i == 0 || i > k {
        return Err(Error::IndexOutOfRange { index: i, k });
    }
    let targets: Vec<moment::ImQuaternion> = if i == 1 {
        r.theta.iter().map(|t| moment::ImQuaternion::new(t.sin(), 0.0, 0.0)).collect()
    } else {
        let th = r.theta[i - 1];
        let pi = th.cos() / th.sin();
        r.theta
            .iter()
            .map(|t| moment::ImQuaternion::new(t.cos() - pi * t.sin(), 0.0, 0.0))
            .collect()
    };
    let mut p = moment::point_from_targets(&targets, true)?;
    // rounding in cot can leave a tiny residue in slot i
    p.coords[i - 1] = ComplexSplit::default();
    Ok(p)
}

pub fn fixed_point_probe(r: &ConformalData, spec: &MomentSpec, i: usize, samples: usize, seed: u64) -> Result<FixedPointReport> {
    let base = fixed_point(r, i)?;
    let k = r.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![base.clone()];
    for _ in 1..samples.max(1) {
        let t: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let c = Quaternion::new(
            rng.gen_range(0.5..1.5),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        pts.push(fiber_act(c, &torus_act(&t, &base)?)?);
    }
    let max_mu = pts
        .iter()
        .map(|p| moment::mu_norm(p, spec) / p.norm_sqr())
        .fold(0.0, f64::max);
    let all_in_p = pts.iter().all(|p| moment::in_P(p, spec));
    let slot_vanishes = pts.iter().all(|p| p.coords[i - 1].norm_sqr() == 0.0);

    let tangent = columns(
        &(0..k).map(|j| infinitesimal(&unit(k, j), &base)).collect::<Result<Vec<_>>>()?,
        4 * k,
    );
    let mut sv: Vec<f64> = tangent.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let stabilizer_directions = sv.iter().filter(|&&s| s < 1e-8).count();
    let v = vertical_space(&base, &spec.d)?;
    Ok(FixedPointReport {
        index: i,
        samples: pts.len(),
        max_mu,
        all_in_p,
        slot_vanishes,
        torus_singular_values: sv,
        stabilizer_directions,
        torus_fibre_deficiency: v.torus_expected - v.torus_rank,
    })
}
