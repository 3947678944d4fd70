//! The torus `T^k` acting on `H^k`, the map `Ω: R^k → R²`, its kernel `g`,
//! and the locally-free screen for the subgroup `G_S`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix};
use crate::qalg::{ComplexSplit, UPoint};
use crate::toric_data::{CombinatorialData, DerivedData, LatticeVector};

pub const DEFAULT_SCREEN_BOUND: i64 = 8;

/// `Ω` as a `2 × k` integer matrix with columns `v_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaMap {
    pub matrix: IntMatrix,
}

impl OmegaMap {
    pub fn k(&self) -> usize {
        self.matrix.first().map_or(0, |r| r.len())
    }

    pub fn rank(&self) -> usize {
        lattice::rank(&self.matrix)
    }

    pub fn apply(&self, d: &[i64]) -> [i64; 2] {
        let row = |r: &Vec<i64>| r.iter().zip(d).map(|(a, b)| a * b).sum();
        [row(&self.matrix[0]), row(&self.matrix[1])]
    }
}

/// Integer basis of `g ∩ Z^k`, one row per generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KernelBasis {
    pub rows: IntMatrix,
}

impl KernelBasis {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&x| x as f64).collect())
            .collect()
    }
}

pub fn build_omega(t: &DerivedData) -> OmegaMap {
    OmegaMap {
        matrix: vec![
            t.vectors.iter().map(|v| v.a).collect(),
            t.vectors.iter().map(|v| v.b).collect(),
        ],
    }
}

/// HNF-canonical saturated basis of `ker Ω`.
pub fn integer_kernel(omega: &OmegaMap) -> Result<KernelBasis> {
    let r = omega.rank();
    if r < 2 {
        return Err(Error::RankDeficient(r));
    }
    Ok(KernelBasis {
        rows: lattice::integer_kernel(&omega.matrix),
    })
}

/// Whether `T^k / G_S` is the standard torus `F = R²/Z²`: the images of the
/// lattice generators `½(e_1 + … + e_k), e_2, …, e_k` must generate `Z²`.
/// `d` must be the kernel basis of the same data; otherwise the answer is `false`.
#[allow(non_snake_case)]
pub fn quotient_is_F(s: &CombinatorialData, d: &KernelBasis) -> bool {
    let t = crate::toric_data::derive_T(s);
    let omega = build_omega(&t);
    if d.rows.iter().any(|r| r.len() != s.k() || omega.apply(r) != [0, 0]) {
        return false;
    }
    let Some(&last) = s.vectors.last() else {
        return false;
    };
    // Ω(½ Σ e_i) = ½ Σ v_i = u_k
    let mut images = vec![vec![last.a, last.b]];
    images.extend(t.vectors.iter().skip(1).map(|v| vec![v.a, v.b]));
    lattice::lattice_index(&images) == Some(1)
}

/// A kernel vector of the forbidden shape whose circle would fix points of `R`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// 1-based split position.
    pub m: usize,
    pub d: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub bound: i64,
    pub locally_free: Verdict,
    pub witnesses: Vec<Witness>,
    /// Positions `m` with `u_{m-1} ∥ u_m`; the screen can only fail there.
    pub parallel_positions: Vec<usize>,
    /// Agreement between the enumeration and the parallel-pair check.
    pub symbolic_agrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_ok(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Enumerate `d = (d_1, …, d_1, d_m, −d_1, …, −d_1)` with `1 ≤ d_1 ≤ bound`
/// and `Σ d_i v_i = 0`. With `U = 2u`, the kernel condition reads
/// `(d_1 + d_m) U_m + (d_1 − d_m) U_{m−1} = 0`, which fixes `d_m`.
pub fn locally_free_screen(t: &DerivedData, bound: i64) -> ScreenReport {
    let k = t.k();
    let u2 = t.doubled_reconstruction();
    let omega = build_omega(t);
    let mut witnesses = Vec::new();
    let mut parallel = Vec::new();

    for m in 2..=k {
        let (um, up) = (u2[m - 1], u2[m - 2]);
        if um.det(up) == 0 {
            parallel.push(m);
        }
        for d1 in 1..=bound {
            for dm in candidate_dm(d1, um, up) {
                let mut d = vec![d1; k];
                d[m - 1] = dm;
                for x in d.iter_mut().skip(m) {
                    *x = -d1;
                }
                if omega.apply(&d) == [0, 0] {
                    witnesses.push(Witness { m, d });
                }
            }
        }
    }

    let symbolic_agrees = if bound >= 1 {
        // a parallel pair admits a witness exactly when the ratio is attainable;
        // an independent pair never does
        witnesses.iter().all(|w| parallel.contains(&w.m))
    } else {
        witnesses.is_empty()
    };
    ScreenReport {
        bound,
        locally_free: Verdict::from_ok(witnesses.is_empty()),
        witnesses,
        parallel_positions: parallel,
        symbolic_agrees,
    }
}

/// Integer `d_m` with `d_1 (U_m + U_{m−1}) + d_m (U_m − U_{m−1}) = 0`.
fn candidate_dm(d1: i64, um: LatticeVector, up: LatticeVector) -> Vec<i64> {
    let s = (um + up).scale(d1);
    let w = um - up;
    if w.is_zero() {
        return if s.is_zero() { vec![0] } else { vec![] };
    }
    // d_m w = -s needs s ∥ w and an integral ratio
    if s.det(w) != 0 {
        return vec![];
    }
    let (num, den) = if w.a != 0 { (-s.a, w.a) } else { (-s.b, w.b) };
    if num % den == 0 {
        vec![num / den]
    } else {
        vec![]
    }
}

/// The right action `[λ_1 x_1 : λ_1⁻¹ y_1 : …]` of `(C*)^k`.
pub fn complex_torus_act(lambda: &[Complex64], p: &UPoint) -> Result<UPoint> {
    if lambda.len() != p.k() {
        return Err(Error::LengthMismatch {
            what: "torus element",
            got: lambda.len(),
            expected: p.k(),
        });
    }
    Ok(UPoint::new(
        p.coords
            .iter()
            .zip(lambda)
            .map(|(s, &l)| ComplexSplit::new(l * s.x, s.y / l))
            .collect(),
    ))
}

/// `p · exp(t)` for `t ∈ R^k`, i.e. `λ_i = e^{i t_i}`.
pub fn torus_act(t: &[f64], p: &UPoint) -> Result<UPoint> {
    let lambda: Vec<Complex64> = t.iter().map(|&s| Complex64::from_polar(1.0, s)).collect();
    complex_torus_act(&lambda, p)
}

/// Tangent vector of `t ↦ p · exp(t d)` at `t = 0`, in real coordinates.
pub fn infinitesimal(d: &[f64], p: &UPoint) -> Result<DVector<f64>> {
    if d.len() != p.k() {
        return Err(Error::LengthMismatch {
            what: "direction",
            got: d.len(),
            expected: p.k(),
        });
    }
    let i = Complex64::i();
    Ok(UPoint::new(
        p.coords
            .iter()
            .zip(d)
            .map(|(s, &di)| ComplexSplit::new(i * di * s.x, -i * di * s.y))
            .collect(),
    )
    .to_real())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub kernel_basis: IntMatrix,
    #[serde(rename = "quotient_is_F")]
    pub quotient_is_f: bool,
    pub locally_free: Verdict,
    pub witnesses: Vec<Witness>,
}

pub fn report(s: &CombinatorialData, bound: i64) -> Result<GroupReport> {
    let t = crate::toric_data::derive_T(s);
    let d = integer_kernel(&build_omega(&t))?;
    let screen = locally_free_screen(&t, bound);
    Ok(GroupReport {
        quotient_is_f: quotient_is_F(s, &d),
        kernel_basis: d.rows,
        locally_free: screen.locally_free,
        witnesses: screen.witnesses,
    })
}
