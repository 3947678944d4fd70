//! Twistor functions `ν_m`, the map `B*`, the moment map `μ = B* ν`, its
//! exact differential, and the holomorphicity and transversality checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_action::{infinitesimal, KernelBasis};
use crate::qalg::{left_real, ComplexSplit, UPoint};
use crate::toric_data::{ConformalData, DerivedData};

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// An element of `Im H` as `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct ImQuaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ImQuaternion {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn arr(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(s * self.a, s * self.b, s * self.c)
    }
}

impl From<[f64; 3]> for ImQuaternion {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<ImQuaternion> for [f64; 3] {
    fn from(v: ImQuaternion) -> Self {
        v.arr()
    }
}

impl std::ops::Add for ImQuaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c)
    }
}

impl std::ops::Sub for ImQuaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

pub type NuVector = Vec<ImQuaternion>;

/// `ν_m = (|x_m|² − |y_m|², Re(2i x_m y_m), Im(2i x_m y_m))`.
pub fn nu_slot(s: ComplexSplit) -> ImQuaternion {
    let w = 2.0 * Complex64::i() * s.x * s.y;
    ImQuaternion::new(s.x.norm_sqr() - s.y.norm_sqr(), w.re, w.im)
}

pub fn nu(p: &UPoint) -> NuVector {
    p.coords.iter().map(|&s| nu_slot(s)).collect()
}

/// Real gradients of the three components of `ν_m` in the coordinates of slot `m`.
pub fn nu_slot_gradients(s: ComplexSplit) -> [[f64; 4]; 3] {
    let i = Complex64::i();
    let g = |gx: Complex64, gy: Complex64| [gx.re, gx.im, gy.re, gy.im];
    [
        g(2.0 * s.x, -2.0 * s.y),
        g(-2.0 * i * s.y.conj(), -2.0 * i * s.x.conj()),
        g(2.0 * s.y.conj(), 2.0 * s.x.conj()),
    ]
}

/// `B*` with kernel `W`, the kernel basis `D` of `g`, and `W` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSpec {
    pub bstar: DMatrix<f64>,
    pub w_basis: [DVector<f64>; 2],
    pub d: KernelBasis,
}

impl MomentSpec {
    pub fn new(r: &ConformalData, d: KernelBasis) -> Result<Self> {
        if let Some(bad) = d.rows.iter().find(|row| row.len() != r.k()) {
            return Err(Error::LengthMismatch {
                what: "kernel basis row",
                got: bad.len(),
                expected: r.k(),
            });
        }
        Ok(Self {
            bstar: build_Bstar(r)?,
            w_basis: w_basis(r),
            d,
        })
    }

    pub fn k(&self) -> usize {
        self.bstar.ncols()
    }

    /// Number of moment components, `k − 2`.
    pub fn rank(&self) -> usize {
        self.bstar.nrows()
    }
}

/// `Re(z)` and `Im(z)` as vectors in `R^k`.
pub fn w_basis(r: &ConformalData) -> [DVector<f64>; 2] {
    [
        DVector::from_iterator(r.k(), r.theta.iter().map(|t| t.cos())),
        DVector::from_iterator(r.k(), r.theta.iter().map(|t| t.sin())),
    ]
}

/// Orthonormal basis of `W^⊥` as rows: Gram–Schmidt on `Re z, Im z, e_1, …, e_k`,
/// keeping what survives after the first two.
#[allow(non_snake_case)]
pub fn build_Bstar(r: &ConformalData) -> Result<DMatrix<f64>> {
    let k = r.k();
    let [re, im] = w_basis(r);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let push = |v: DVector<f64>, basis: &mut Vec<DVector<f64>>| -> bool {
        let scale = v.norm();
        let mut w = v;
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dot(&w);
                w -= b * c;
            }
        }
        let n = w.norm();
        if n > 1e-10 * scale.max(1.0) {
            basis.push(w / n);
            true
        } else {
            false
        }
    };
    if !push(re, &mut basis) || !push(im, &mut basis) {
        return Err(Error::DependentConformalData);
    }
    for i in 0..k {
        if basis.len() == k {
            break;
        }
        push(DVector::from_fn(k, |j, _| f64::from(u8::from(i == j))), &mut basis);
    }
    let rows: Vec<_> = basis[2..].iter().map(|b| b.transpose()).collect();
    Ok(DMatrix::from_rows(&rows))
}

fn combine(bstar: &DMatrix<f64>, nu: &[ImQuaternion]) -> Vec<ImQuaternion> {
    (0..bstar.nrows())
        .map(|r| {
            nu.iter()
                .enumerate()
                .fold(ImQuaternion::default(), |acc, (i, n)| acc + n.scale(bstar[(r, i)]))
        })
        .collect()
}

pub fn mu(p: &UPoint, spec: &MomentSpec) -> Vec<ImQuaternion> {
    combine(&spec.bstar, &nu(p))
}

/// `‖μ(p)‖`; equals the distance from `ν(p)` to `W ⊗ Im H` because `B*` is orthonormal.
pub fn mu_norm(p: &UPoint, spec: &MomentSpec) -> f64 {
    mu(p, spec).iter().map(|m| m.norm_sqr()).sum::<f64>().sqrt()
}

/// Jacobian of `μ` in real coordinates; row `3r + a` is `∇μ_{r,a}`.
pub fn dmu(p: &UPoint, spec: &MomentSpec) -> DMatrix<f64> {
    dmu_signed(p, spec, [1.0; 3])
}

fn dmu_signed(p: &UPoint, spec: &MomentSpec, signs: [f64; 3]) -> DMatrix<f64> {
    let (rank, k) = (spec.rank(), p.k());
    let mut j = DMatrix::zeros(3 * rank, 4 * k);
    for (i, &s) in p.coords.iter().enumerate() {
        let g = nu_slot_gradients(s);
        for r in 0..rank {
            let b = spec.bstar[(r, i)];
            for a in 0..3 {
                for c in 0..4 {
                    j[(3 * r + a, 4 * i + c)] = signs[a] * b * g[a][c];
                }
            }
        }
    }
    j
}

/// Orientation of `(I_1, I_2, I_3)` in which `I_a ∇ν_a` agree.
pub const FRAME_SIGNS: [f64; 3] = [1.0, -1.0, -1.0];

/// `max_{r, a<b} ‖ε_a I_a ∇μ_{r,a} − ε_b I_b ∇μ_{r,b}‖`, with `ε = FRAME_SIGNS`.
pub fn holomorphicity_residual(p: &UPoint, spec: &MomentSpec) -> f64 {
    holomorphicity_residual_with(p, spec, [1.0; 3])
}

/// As [`holomorphicity_residual`], after multiplying the components of every
/// `ν_m` by `nu_signs`. Used to check the test is sensitive.
pub fn holomorphicity_residual_with(p: &UPoint, spec: &MomentSpec, nu_signs: [f64; 3]) -> f64 {
    let j = dmu_signed(p, spec, nu_signs);
    let mut worst: f64 = 0.0;
    for r in 0..spec.rank() {
        let rotated: Vec<DVector<f64>> = (0..3)
            .map(|a| {
                let grad = j.row(3 * r + a).transpose();
                left_real(a as u8 + 1, &grad).expect("axis in range") * FRAME_SIGNS[a]
            })
            .collect();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            worst = worst.max((&rotated[a] - &rotated[b]).norm());
        }
    }
    worst
}

#[allow(non_snake_case)]
pub fn in_P(p: &UPoint, spec: &MomentSpec) -> bool {
    in_P_tol(p, spec, DEFAULT_ZERO_TOL)
}

#[allow(non_snake_case)]
pub fn in_P_tol(p: &UPoint, spec: &MomentSpec, tol: f64) -> bool {
    !p.is_zero() && mu_norm(p, spec) <= tol * p.norm_sqr()
}

/// Independent membership test: residual of projecting each component of
/// `ν(p)` onto `W` by least squares.
pub fn nu_in_w(p: &UPoint, r: &ConformalData, tol: f64) -> bool {
    if p.is_zero() {
        return false;
    }
    let [re, im] = w_basis(r);
    let w = DMatrix::from_columns(&[re, im]);
    let n = nu(p);
    let qr = w.clone().qr();
    let mut res2 = 0.0;
    for a in 0..3 {
        let col = DVector::from_iterator(n.len(), n.iter().map(|x| x.arr()[a]));
        let coef = qr.r().solve_upper_triangular(&(qr.q().transpose() * &col)).expect("W has rank 2");
        res2 += (&col - &w * coef).norm_squared();
    }
    res2.sqrt() <= tol * p.norm_sqr()
}

/// The point with `ν(p) = t`, slot by slot, with `x_i` real and nonnegative.
/// Zero targets give zero slots when `allow_zero`, otherwise an error.
pub fn point_from_targets(targets: &[ImQuaternion], allow_zero: bool) -> Result<UPoint> {
    targets
        .iter()
        .enumerate()
        .map(|(index, t)| {
            let n = t.norm();
            if n == 0.0 {
                return if allow_zero {
                    Ok(ComplexSplit::default())
                } else {
                    Err(Error::DegenerateTarget { index: index + 1 })
                };
            }
            let xr = ((n + t.a) / 2.0).max(0.0).sqrt();
            if xr > 1e-150 {
                let y = Complex64::new(t.c, -t.b) / (2.0 * xr);
                Ok(ComplexSplit::new(Complex64::new(xr, 0.0), y))
            } else {
                let yr = ((n - t.a) / 2.0).max(0.0).sqrt();
                Ok(ComplexSplit::new(Complex64::default(), Complex64::new(yr, 0.0)))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(UPoint::new)
}

/// Targets `Re(z_i) 𝐱 + Im(z_i) 𝐲` for the orbit representative
/// `𝐱 = (1,0,0)`, `𝐲 = (−x̃, ỹ, 0)`.
pub fn orbit_targets(r: &ConformalData, xt: f64, yt: f64) -> Vec<ImQuaternion> {
    r.theta
        .iter()
        .map(|&t| {
            let (s, c) = t.sin_cos();
            ImQuaternion::new(c - xt * s, yt * s, 0.0)
        })
        .collect()
}

/// The point of `P` over the orbit labelled `(x̃, ỹ)`, `ỹ > 0`.
pub fn orbit_point(r: &ConformalData, xt: f64, yt: f64) -> Result<UPoint> {
    if !(yt > 0.0) {
        return Err(Error::Input(format!("orbit parameter y must be positive, got {yt}")));
    }
    point_from_targets(&orbit_targets(r, xt, yt), false)
}

/// One sampled orbit.
#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub ix: usize,
    pub iy: usize,
    pub xt: f64,
    pub yt: f64,
    pub point: UPoint,
}

#[allow(non_snake_case)]
pub fn sample_P(r: &ConformalData, grid: &crate::grid::GridSpec) -> Result<Vec<OrbitSample>> {
    grid.cells()
        .map(|c| {
            Ok(OrbitSample {
                ix: c.ix,
                iy: c.iy,
                xt: c.x,
                yt: c.y,
                point: orbit_point(r, c.x, c.y)?,
            })
        })
        .collect()
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::LengthMismatch { what, got, expected })
    }
}

/// `δ · det(Σ_i (Re z_i, Im z_i) ⊗ v_i / |q_i|²)` with `δ = Π |q_i|²`, expanded
/// by Cauchy–Binet so that it is polynomial in the `|q_i|²`.
pub fn transversality_det(p: &UPoint, t: &DerivedData, r: &ConformalData) -> Result<f64> {
    let k = p.k();
    check_len("derived data", t.k(), k)?;
    check_len("conformal data", r.k(), k)?;
    let n2 = p.slot_norms_sqr();
    let vanishing = n2.iter().filter(|&&x| x == 0.0).count();
    if vanishing >= 2 {
        return Err(Error::TooManyVanishing { count: vanishing });
    }
    let mut total = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let da = (r.theta[j] - r.theta[i]).sin();
            let dv = t.vectors[i].det(t.vectors[j]) as f64;
            if da == 0.0 || dv == 0.0 {
                continue;
            }
            let rest: f64 = (0..k).filter(|&l| l != i && l != j).map(|l| n2[l]).product();
            total += da * dv * rest;
        }
    }
    Ok(total)
}

/// `transversality_det / (Σ |q_i|²)^{k−2}`; invariant under fibre scaling.
pub fn transversality_normalized(p: &UPoint, t: &DerivedData, r: &ConformalData) -> Result<f64> {
    let det = transversality_det(p, t, r)?;
    Ok(det / p.norm_sqr().powi(p.k() as i32 - 2))
}

/// `K_{rs} = h(X(D_r), X(B_s))` with `B_s` the rows of `B*`.
pub fn transversality_bilinear(p: &UPoint, spec: &MomentSpec) -> Result<DMatrix<f64>> {
    check_len("point", p.k(), spec.k())?;
    let a: Vec<DVector<f64>> = spec
        .d
        .to_f64()
        .iter()
        .map(|d| infinitesimal(d, p))
        .collect::<Result<_>>()?;
    let b: Vec<DVector<f64>> = spec
        .bstar
        .row_iter()
        .map(|row| infinitesimal(row.transpose().as_slice(), p))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| a[i].dot(&b[j])))
}

/// One grid cell of a transversality scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub x: f64,
    pub y: f64,
    /// `transversality_det / (Σ|q_i|²)^{k−2}`.
    pub det: f64,
    /// `det K / (Σ|q_i|²)^{k−2}` for the bilinear form `K`.
    pub bilinear_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalityScan {
    pub min_abs_det: f64,
    pub sign_changes: usize,
    pub samples: usize,
    pub summary: crate::grid::SignSummary,
    /// Cells where exactly one of the two determinants is below `tol`.
    pub bilinear_disagreements: usize,
    pub passed: bool,
    #[serde(skip)]
    pub points: Vec<ScanPoint>,
}

/// Normalized transversality determinant on every cell of `grid`.
pub fn scan_transversality(
    t: &DerivedData,
    r: &ConformalData,
    spec: &MomentSpec,
    grid: &crate::grid::GridSpec,
    tol: f64,
) -> Result<TransversalityScan> {
    let k = r.k() as i32;
    let points = grid
        .evaluate(|c| -> Result<ScanPoint> {
            let p = orbit_point(r, c.x, c.y)?;
            let scale = p.norm_sqr().powi(k - 2);
            let det = transversality_det(&p, t, r)? / scale;
            let bilinear_det = transversality_bilinear(&p, spec)?.determinant() / scale;
            Ok(ScanPoint { x: c.x, y: c.y, det, bilinear_det })
        })
        .into_iter()
        .map(|(_, v)| v)
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = points.iter().map(|p| p.det).collect();
    let summary = crate::grid::SignSummary::of_grid(&values, grid.n, tol);
    let bilinear_disagreements = points
        .iter()
        .filter(|p| (p.det.abs() > tol) != (p.bilinear_det.abs() > tol))
        .count();
    Ok(TransversalityScan {
        min_abs_det: summary.min_abs,
        sign_changes: summary.sign_changes,
        samples: summary.samples,
        passed: summary.definite() && bilinear_disagreements == 0,
        summary,
        bilinear_disagreements,
        points,
    })
}
