//! Elementary solutions `f^p` of Joyce's equation on the half-plane, the
//! matrix `½ Σ f^{p_i} ⊗ v_i`, and its comparison with the moment-side
//! transversality determinant.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SignSummary};
use crate::moment;
use crate::toric_data::{ConformalData, DerivedData};

pub const DEFAULT_BOUNDARY_EPS: [f64; 2] = [1e-3, 1e-5];
pub const DEFAULT_DET_TOL: f64 = 1e-9;
/// Allowed relative deviation from the exact determinant ratio.
pub const RATIO_TOL: f64 = 1e-8;

/// A point of `R ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PValue {
    Finite(f64),
    Infinite,
}

impl PValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PValue::Finite(p) => Some(p),
            PValue::Infinite => None,
        }
    }
}

impl fmt::Display for PValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PValue::Finite(p) => write!(f, "{p}"),
            PValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for PValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PValue::Finite(p) => s.serialize_f64(*p),
            PValue::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `f^p(x̃, ỹ) = (x̃ − p, ỹ)/ρ`, and `f^∞ = (−1, 0)`.
pub fn f_p(p: PValue, x: f64, y: f64) -> Result<[f64; 2]> {
    if y < 0.0 {
        return Err(Error::Input(format!("f^p needs y >= 0, got {y}")));
    }
    match p {
        PValue::Infinite => Ok([-1.0, 0.0]),
        PValue::Finite(p) => {
            let rho = (x - p).hypot(y);
            if rho == 0.0 {
                Err(Error::SingularPoint { p })
            } else {
                Ok([(x - p) / rho, y / rho])
            }
        }
    }
}

/// `p_i = cot θ_i`, with `p_1 = ∞`.
pub fn p_from_r(r: &ConformalData) -> Vec<PValue> {
    r.theta
        .iter()
        .map(|&t| {
            let s = t.sin();
            if s == 0.0 {
                PValue::Infinite
            } else {
                PValue::Finite(t.cos() / s)
            }
        })
        .collect()
}

/// `½ Σ f^{p_i} ⊗ v_i`, entry `(a, b) = ½ Σ f^{p_i}_a (v_i)_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JoyceMatrix {
    pub m: [[f64; 2]; 2],
}

impl JoyceMatrix {
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Determinant of the sum without the factor `½`.
    pub fn sum_det(&self) -> f64 {
        4.0 * self.det()
    }
}

pub fn joyce_matrix(t: &DerivedData, ps: &[PValue], x: f64, y: f64) -> Result<JoyceMatrix> {
    if ps.len() != t.k() {
        return Err(Error::LengthMismatch {
            what: "p list",
            got: ps.len(),
            expected: t.k(),
        });
    }
    let mut m = [[0.0; 2]; 2];
    for (&p, v) in ps.iter().zip(&t.vectors) {
        let f = f_p(p, x, y)?;
        let v = [v.a as f64, v.b as f64];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += 0.5 * f[a] * v[b];
            }
        }
    }
    Ok(JoyceMatrix { m })
}

/// `(δ/ỹ) det Σ f^{p_i} ⊗ v_i` with `δ = Π_{p_i finite} ρ_i`; finite as `ỹ → 0`.
pub fn boundary_normalized_det(t: &DerivedData, ps: &[PValue], x: f64, y: f64) -> Result<f64> {
    let det = joyce_matrix(t, ps, x, y)?.sum_det();
    let delta: f64 = ps.iter().filter_map(|p| p.finite()).map(|p| (x - p).hypot(y)).product();
    Ok(delta / y * det)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub eps: f64,
    pub values: Vec<f64>,
    pub summary: SignSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NondegeneracyReport {
    pub samples: usize,
    pub min_abs_det: f64,
    pub sign_changes: usize,
    pub interior: SignSummary,
    pub boundary: Vec<BoundaryRow>,
    /// Linear extrapolation of the boundary rows to `ỹ = 0`.
    pub extrapolated: Option<SignSummary>,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Interior scan of `det Σ f^{p_i} ⊗ v_i` plus boundary rows at `ỹ = ε`.
pub fn nondegeneracy_scan(
    t: &DerivedData,
    ps: &[PValue],
    grid: &GridSpec,
    eps: &[f64],
    tol: f64,
) -> Result<NondegeneracyReport> {
    let mut warnings = Vec::new();
    if grid.is_empty() {
        warnings.push("empty grid: nothing sampled".to_string());
    }
    let values = grid
        .evaluate(|c| joyce_matrix(t, ps, c.x, c.y).map(|m| m.sum_det()))
        .into_iter()
        .map(|(_, v)| v)
        .collect::<Result<Vec<f64>>>()?;
    let interior = SignSummary::of_grid(&values, grid.n, tol);

    let xs: Vec<f64> = (0..grid.n).map(|i| grid.x_at(i)).collect();
    let boundary = eps
        .iter()
        .map(|&e| {
            let values = xs
                .iter()
                .map(|&x| boundary_normalized_det(t, ps, x, e))
                .collect::<Result<Vec<f64>>>()?;
            let summary = SignSummary::of_grid(&values, values.len(), tol);
            Ok(BoundaryRow { eps: e, values, summary })
        })
        .collect::<Result<Vec<_>>>()?;

    let extrapolated = match boundary.as_slice() {
        [a, b, ..] if a.eps != b.eps => {
            let w = b.eps / (a.eps - b.eps);
            let vals: Vec<f64> = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(va, vb)| vb - (va - vb) * w)
                .collect();
            Some(SignSummary::of_grid(&vals, vals.len(), tol))
        }
        _ => None,
    };

    let interior_sign = if interior.negative > 0 { -1 } else { 1 };
    let edge_ok = |s: &SignSummary| {
        s.definite() && (s.samples == 0 || (interior_sign > 0) == (s.positive > 0))
    };
    let passed = interior.definite()
        && boundary.iter().all(|b| edge_ok(&b.summary))
        && extrapolated.as_ref().is_none_or(edge_ok);
    Ok(NondegeneracyReport {
        samples: interior.samples,
        min_abs_det: interior.min_abs,
        sign_changes: interior.sign_changes,
        interior,
        boundary,
        extrapolated,
        passed,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub x: f64,
    pub y: f64,
    pub moment_side: f64,
    pub joyce_side: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub samples: usize,
    pub both_nonzero: usize,
    pub both_zero: usize,
    /// Points where exactly one side vanishes, or the relative sign differs
    /// from the first sample.
    pub mismatches: Vec<Mismatch>,
    pub relative_sign: i8,
    pub relative_sign_constant: bool,
    /// `max |J + M / Π_{i≥2} sin θ_i| / max(|J|, |M/Π sin θ_i|)` over samples,
    /// with `J = (δ/ỹ) det Σ f ⊗ v` and `M` the cleared transversality determinant.
    pub max_ratio_residual: f64,
    pub ratio_consistent: bool,
    pub passed: bool,
}

/// Both determinants at every grid point, with `|q_i|²` matched to the
/// orbit labelled `(x̃, ỹ)`.
pub fn correspondence_check(t: &DerivedData, r: &ConformalData, grid: &GridSpec, tol: f64) -> Result<CorrespondenceReport> {
    correspondence_check_split(t, t, r, grid, tol)
}

/// As [`correspondence_check`] with separate data on the two sides.
pub fn correspondence_check_split(
    t_moment: &DerivedData,
    t_joyce: &DerivedData,
    r: &ConformalData,
    grid: &GridSpec,
    tol: f64,
) -> Result<CorrespondenceReport> {
    let ps = p_from_r(r);
    let sin_prod: f64 = r.theta.iter().map(|t| t.sin()).filter(|&s| s != 0.0).product();
    let k = r.k() as i32;
    let rows = grid
        .evaluate(|c| -> Result<[f64; 5]> {
            let p = moment::orbit_point(r, c.x, c.y)?;
            let m = moment::transversality_det(&p, t_moment, r)?;
            let m_norm = m / p.norm_sqr().powi(k - 2);
            let j = joyce_matrix(t_joyce, &ps, c.x, c.y)?.sum_det();
            let jb = boundary_normalized_det(t_joyce, &ps, c.x, c.y)?;
            Ok([c.x, c.y, m_norm, j, (jb + m / sin_prod).abs() / jb.abs().max((m / sin_prod).abs())])
        })
        .into_iter()
        .map(|(_, v)| v)
        .collect::<Result<Vec<_>>>()?;

    let mut both_nonzero = 0;
    let mut both_zero = 0;
    let mut mismatches = Vec::new();
    let mut relative_sign = 0i8;
    let mut max_ratio_residual: f64 = 0.0;
    for &[x, y, m, j, res] in &rows {
        let mismatch = Mismatch { x, y, moment_side: m, joyce_side: j };
        match (m.abs() > tol, j.abs() > tol) {
            (true, true) => {
                both_nonzero += 1;
                let s = if (m > 0.0) == (j > 0.0) { 1 } else { -1 };
                if relative_sign == 0 {
                    relative_sign = s;
                } else if s != relative_sign {
                    mismatches.push(mismatch);
                }
            }
            (false, false) => both_zero += 1,
            _ => mismatches.push(mismatch),
        }
        if res.is_finite() {
            max_ratio_residual = max_ratio_residual.max(res);
        }
    }
    let relative_sign_constant = mismatches.iter().all(|m| m.moment_side.abs() <= tol || m.joyce_side.abs() <= tol);
    Ok(CorrespondenceReport {
        samples: rows.len(),
        both_nonzero,
        both_zero,
        passed: mismatches.is_empty() && max_ratio_residual <= RATIO_TOL,
        ratio_consistent: max_ratio_residual <= RATIO_TOL,
        mismatches,
        relative_sign,
        relative_sign_constant,
        max_ratio_residual,
    })
}
