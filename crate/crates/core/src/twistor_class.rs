//! The twistor line through the base point `(1, z_j)`, the `T^k_C`-valued
//! function `Ψ`, its image `ψ` in `F_C`, and the deformability count.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_action::{build_omega, integer_kernel};
use crate::toric_data::{self, CombinatorialData, ConformalData, DerivedData};

/// A point of the twistor line; `None` is `z = ∞`.
pub type LineParam = Option<Complex64>;

/// Homogeneous coordinates `(X_1, Y_1, …, X_k, Y_k)` in `C^{2k}` of the
/// point `[x : y] = [1 : z]` (or `[0 : 1]`), with `X_j = x − z̄_j y`, `Y_j = z_j x + y`.
pub fn line_point(r: &ConformalData, z: LineParam) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let (x, y) = match z {
        Some(z) => (one, z),
        None => (Complex64::default(), one),
    };
    r.z().into_iter().flat_map(|zj| [x - zj.conj() * y, zj * x + y]).collect()
}

/// Left multiplication by `j` on homogeneous coordinates: `(X, Y) ↦ (−Ȳ, X̄)`.
pub fn quaternionic_j(coords: &[Complex64]) -> Vec<Complex64> {
    coords
        .chunks(2)
        .flat_map(|c| [-c[1].conj(), c[0].conj()])
        .collect()
}

/// Distance from `u` to the complex line through `v`, relative to `‖u‖`.
pub fn projective_residual(u: &[Complex64], v: &[Complex64]) -> f64 {
    let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let uu: f64 = u.iter().map(|x| x.norm_sqr()).sum();
    if vv == 0.0 || uu == 0.0 {
        return if vv == uu { 0.0 } else { 1.0 };
    }
    let c: Complex64 = v.iter().zip(u).map(|(a, b)| a.conj() * b).sum::<Complex64>() / vv;
    let res: f64 = u.iter().zip(v).map(|(a, b)| (a - c * b).norm_sqr()).sum();
    (res / uu).sqrt()
}

/// `z ↦ −1/z̄`.
pub fn antipodal(z: LineParam) -> LineParam {
    match z {
        None => Some(Complex64::default()),
        Some(z) if z == Complex64::default() => None,
        Some(z) => Some(-1.0 / z.conj()),
    }
}

/// `z ↦ 1/z̄`.
pub fn circle_inversion(z: LineParam) -> LineParam {
    match z {
        None => Some(Complex64::default()),
        Some(z) if z == Complex64::default() => None,
        Some(z) => Some(1.0 / z.conj()),
    }
}

/// Residual of `j · ℓ(z) = ℓ(σ(z))` in `CP^{2k−1}`.
pub fn real_structure_residual(r: &ConformalData, z: LineParam, sigma: fn(LineParam) -> LineParam) -> f64 {
    projective_residual(&quaternionic_j(&line_point(r, z)), &line_point(r, sigma(z)))
}

fn check_pole(r: &ConformalData, z: Complex64) -> Result<()> {
    for (i, zi) in r.z().into_iter().enumerate() {
        if (z - zi).norm() < 1e-300 || (z + zi).norm() < 1e-300 {
            return Err(Error::Pole {
                z: format!("{z}"),
                index: i + 1,
            });
        }
    }
    Ok(())
}

/// `Ψ_i(z) = (z + z_i)/(z − z_i)`, defined up to a global sign.
#[allow(non_snake_case)]
pub fn Psi(r: &ConformalData, z: Complex64) -> Result<Vec<Complex64>> {
    check_pole(r, z)?;
    Ok(r.z().into_iter().map(|zi| (z + zi) / (z - zi)).collect())
}

/// The `T^k_C` action `(X_j, Y_j) ↦ (λ_j X_j, λ_j⁻¹ Y_j)` on homogeneous coordinates.
pub fn torus_c_act(lambda: &[Complex64], coords: &[Complex64]) -> Vec<Complex64> {
    coords
        .chunks(2)
        .zip(lambda)
        .flat_map(|(c, l)| [l * c[0], c[1] / l])
        .collect()
}

/// `‖Ψ(z) · ℓ(z) − ℓ(−z)‖` projectively.
pub fn involution_residual(r: &ConformalData, z: Complex64) -> Result<f64> {
    let moved = torus_c_act(&Psi(r, z)?, &line_point(r, Some(z)));
    Ok(projective_residual(&moved, &line_point(r, Some(-z))))
}

/// `ψ(z) = Π_i Ψ_i(z)^{v_i}` as a pair in `(C*)²`.
pub fn psi(t: &DerivedData, r: &ConformalData, z: Complex64) -> Result<[Complex64; 2]> {
    let base = Psi(r, z)?;
    let mut out = [Complex64::new(1.0, 0.0); 2];
    for (b, v) in base.iter().zip(&t.vectors) {
        out[0] *= b.powi(v.a as i32);
        out[1] *= b.powi(v.b as i32);
    }
    Ok(out)
}

/// `Ω_*` applied to `Ψ(z)` through the logarithm: `exp(Σ v_i log Ψ_i)`.
pub fn psi_via_log(t: &DerivedData, r: &ConformalData, z: Complex64) -> Result<[Complex64; 2]> {
    let logs: Vec<Complex64> = Psi(r, z)?.iter().map(|b| b.ln()).collect();
    let mut acc = [Complex64::default(); 2];
    for (l, v) in logs.iter().zip(&t.vectors) {
        acc[0] += l * v.a as f64;
        acc[1] += l * v.b as f64;
    }
    Ok([acc[0].exp(), acc[1].exp()])
}

fn rel_diff(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    (0..2)
        .map(|c| (a[c] - b[c]).norm() / a[c].norm().max(b[c].norm()).max(1.0))
        .fold(0.0, f64::max)
}

/// A random `z` in the annulus `1/4 < |z| < 4`, clear of `±z_i`.
pub fn random_z(r: &ConformalData, rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let z = Complex64::from_polar(rng.gen_range(-1.4f64..1.4).exp(), rng.gen_range(-3.2..3.2));
        if r.z().iter().all(|zi| (z - zi).norm() > 1e-3 && (z + zi).norm() > 1e-3) {
            return z;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineChecks {
    /// `max |j ℓ(z) − ℓ(−1/z̄)|` projectively.
    pub antipodal_residual: f64,
    /// Same for `z ↦ 1/z̄`.
    pub inversion_residual: f64,
    pub real_structure: &'static str,
    /// `max ‖Ψ(z)·ℓ(z) − ℓ(−z)‖`.
    pub involution_residual: f64,
    /// `max` relative difference of the two evaluations of `ψ`.
    pub product_form_residual: f64,
    /// `max |ψ(−1/z̄) · conj ψ(z) − 1|`.
    pub reality_residual: f64,
    pub angles_ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub s: Vec<[i64; 2]>,
    pub theta: Vec<f64>,
    pub v: Vec<[i64; 2]>,
    pub z: Vec<[f64; 2]>,
    pub zeta: Vec<[f64; 2]>,
    pub convex: bool,
    pub checks: LineChecks,
    pub warnings: Vec<String>,
    pub passed: bool,
}

pub const INVOLUTION_TOL: f64 = 1e-9;
pub const PUSHFORWARD_TOL: f64 = 1e-12;

pub fn line_checks(t: &DerivedData, r: &ConformalData, samples: usize, seed: u64) -> Result<LineChecks> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut anti, mut inv, mut invol, mut prod, mut real) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut zs: Vec<LineParam> = vec![Some(Complex64::default()), None];
    zs.extend((0..samples).map(|_| Some(random_z(r, &mut rng))));
    for z in &zs {
        anti = anti.max(real_structure_residual(r, *z, antipodal));
        inv = inv.max(real_structure_residual(r, *z, circle_inversion));
        let Some(z) = *z else { continue };
        invol = invol.max(involution_residual(r, z)?);
        let a = psi(t, r, z)?;
        prod = prod.max(rel_diff(a, psi_via_log(t, r, z)?));
        if z != Complex64::default() {
            let b = psi(t, r, -1.0 / z.conj())?;
            real = real.max((0..2).map(|c| (b[c] * a[c].conj() - 1.0).norm()).fold(0.0, f64::max));
        }
    }
    let real_structure = match (anti <= INVOLUTION_TOL, inv <= INVOLUTION_TOL) {
        (true, false) => "antipodal",
        (false, true) => "inversion",
        (true, true) => "both",
        (false, false) => "neither",
    };
    Ok(LineChecks {
        antipodal_residual: anti,
        inversion_residual: inv,
        real_structure,
        involution_residual: invol,
        product_form_residual: prod,
        reality_residual: real,
        angles_ordered: toric_data::validate_R(r).valid,
    })
}

pub fn classification_report(s: &CombinatorialData, r: &ConformalData, samples: usize, seed: u64) -> Result<ClassificationReport> {
    if s.k() != r.k() {
        return Err(Error::LengthMismatch {
            what: "conformal data",
            got: r.k(),
            expected: s.k(),
        });
    }
    let t = toric_data::derive_T(s);
    let convex = toric_data::is_convex(s)?;
    let checks = line_checks(&t, r, samples, seed)?;
    let mut warnings = Vec::new();
    if !convex {
        warnings.push("S is not convex; the quotient is not guaranteed to exist".to_string());
    }
    let pair = |z: Complex64| [z.re, z.im];
    let passed = checks.real_structure == "antipodal"
        && checks.involution_residual <= INVOLUTION_TOL
        && checks.product_form_residual <= PUSHFORWARD_TOL
        && checks.angles_ordered;
    Ok(ClassificationReport {
        s: s.vectors.iter().map(|v| v.arr()).collect(),
        theta: r.theta.clone(),
        v: t.vectors.iter().map(|v| v.arr()).collect(),
        z: r.z().into_iter().map(pair).collect(),
        zeta: r.zeta().into_iter().map(pair).collect(),
        convex,
        checks,
        warnings,
        passed,
    })
}

/// Quadratic fibre monomial with its `T^k` weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Monomial {
    /// `"xx"`, `"xy"` or `"yy"`.
    pub kind: &'static str,
    pub a: usize,
    pub b: usize,
    pub weight: Vec<i64>,
}

pub fn quadratic_monomials(k: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for a in 0..k {
        for b in 0..k {
            let mut w = vec![0i64; k];
            w[a] += 1;
            w[b] -= 1;
            out.push(Monomial { kind: "xy", a, b, weight: w });
            if a <= b {
                let mut w = vec![0i64; k];
                w[a] += 1;
                w[b] += 1;
                out.push(Monomial { kind: "xx", a, b, weight: w.clone() });
                out.push(Monomial { kind: "yy", a, b, weight: w.iter().map(|x| -x).collect() });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformabilityReport {
    pub tk_invariant_dim: usize,
    /// One representative per pair `{w, −w}`, first nonzero entry positive.
    pub extra_weights: Vec<Vec<i64>>,
    pub extra_dim: usize,
}

pub fn deformability(t: &DerivedData) -> Result<DeformabilityReport> {
    let d = integer_kernel(&build_omega(t))?;
    let invariant = |w: &[i64]| d.rows.iter().all(|r| r.iter().zip(w).map(|(a, b)| a * b).sum::<i64>() == 0);
    let monos = quadratic_monomials(t.k());
    let tk_invariant_dim = monos.iter().filter(|m| m.weight.iter().all(|&x| x == 0)).count();
    let mut extra: Vec<Vec<i64>> = monos
        .iter()
        .filter(|m| m.weight.iter().any(|&x| x != 0) && invariant(&m.weight))
        .map(|m| {
            let lead = m.weight.iter().find(|&&x| x != 0).copied().unwrap_or(1);
            m.weight.iter().map(|x| x * lead.signum()).collect()
        })
        .collect();
    extra.sort_by(|a, b| b.cmp(a));
    extra.dedup();
    Ok(DeformabilityReport {
        tk_invariant_dim,
        extra_dim: 2 * extra.len(),
        extra_weights: extra,
    })
}
