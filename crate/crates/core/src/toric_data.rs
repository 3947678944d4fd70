//! Combinatorial data `S = [u_1, …, u_k]`, its companion `T = [v_1, …, v_k]`,
//! and the conformal data given by boundary angles `θ_i`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, det2};

/// A point of the lattice `Λ ≅ Z²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct LatticeVector {
    pub a: i64,
    pub b: i64,
}

impl LatticeVector {
    pub const fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn arr(self) -> [i64; 2] {
        [self.a, self.b]
    }

    pub fn det(self, other: LatticeVector) -> i64 {
        det2(self.arr(), other.arr())
    }

    pub fn scale(self, s: i64) -> Self {
        Self::new(self.a * s, self.b * s)
    }

    /// In the half-open sector: `(p, 0)` with `p > 0`, or second coordinate `> 0`.
    pub fn in_sector(self) -> bool {
        self.b > 0 || (self.b == 0 && self.a > 0)
    }
}

impl From<[i64; 2]> for LatticeVector {
    fn from(v: [i64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<LatticeVector> for [i64; 2] {
    fn from(v: LatticeVector) -> Self {
        v.arr()
    }
}

impl std::ops::Add for LatticeVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

impl std::ops::Sub for LatticeVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }
}

impl std::ops::Neg for LatticeVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// The ordered stabilizer data `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CombinatorialData {
    pub vectors: Vec<LatticeVector>,
}

impl CombinatorialData {
    pub fn new(vectors: Vec<LatticeVector>) -> Self {
        Self { vectors }
    }

    pub fn from_pairs(pairs: &[[i64; 2]]) -> Self {
        Self::new(pairs.iter().map(|&p| p.into()).collect())
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn as_rows(&self) -> lattice::IntMatrix {
        self.vectors.iter().map(|v| vec![v.a, v.b]).collect()
    }

    fn check_shape(&self) -> Result<()> {
        if self.k() < 3 {
            return Err(Error::TooFewVectors(self.k()));
        }
        if let Some(index) = self.vectors.iter().position(|v| v.is_zero()) {
            return Err(Error::ZeroVector { index: index + 1 });
        }
        Ok(())
    }
}

/// The ordered data `T`, `v_1 = u_1 + u_k`, `v_i = u_i - u_{i-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DerivedData {
    pub vectors: Vec<LatticeVector>,
}

impl DerivedData {
    pub fn new(vectors: Vec<LatticeVector>) -> Self {
        Self { vectors }
    }

    pub fn from_pairs(pairs: &[[i64; 2]]) -> Self {
        Self::new(pairs.iter().map(|&p| p.into()).collect())
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    /// `2 u_i = Σ_{j≤i} v_j − Σ_{j>i} v_j`; always integral.
    pub fn doubled_reconstruction(&self) -> Vec<LatticeVector> {
        let total = self
            .vectors
            .iter()
            .fold(LatticeVector::default(), |acc, &v| acc + v);
        let mut prefix = LatticeVector::default();
        self.vectors
            .iter()
            .map(|&v| {
                prefix = prefix + v;
                prefix - (total - prefix)
            })
            .collect()
    }
}

/// One failed check, in the shape used by the JSON error array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub check: String,
    /// 1-based position the check refers to, when there is one.
    pub index: Option<usize>,
    pub message: String,
}

impl Issue {
    pub fn new(check: &str, index: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            check: check.to_string(),
            index,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SValidation {
    pub sector_normalized: bool,
    pub consecutive_independent: bool,
    pub generates_lattice: bool,
    /// `[Λ : Λ_S]`; `None` when `S` spans a rank-1 sublattice.
    pub index: Option<i64>,
    pub issues: Vec<Issue>,
}

impl SValidation {
    pub fn is_valid(&self) -> bool {
        self.sector_normalized && self.consecutive_independent
    }

    /// Valid and generating `Λ`: the orbifold is simply connected.
    pub fn simply_connected(&self) -> bool {
        self.is_valid() && self.generates_lattice
    }
}

#[allow(non_snake_case)]
pub fn validate_S(s: &CombinatorialData) -> Result<SValidation> {
    s.check_shape()?;
    let mut issues = Vec::new();

    let first = s.vectors[0];
    let mut sector = true;
    if !(first.b == 0 && first.a > 0) {
        sector = false;
        issues.push(Issue::new("sector", Some(1), format!("u_1 = {first} is not of the form (p, 0) with p >= 1")));
    }
    for (i, v) in s.vectors.iter().enumerate().skip(1) {
        if !v.in_sector() {
            sector = false;
            issues.push(Issue::new("sector", Some(i + 1), format!("u_{} = {v} is outside the sector", i + 1)));
        }
    }

    let mut independent = true;
    for (i, w) in s.vectors.windows(2).enumerate() {
        if w[0].det(w[1]) == 0 {
            independent = false;
            issues.push(Issue::new(
                "consecutive_independence",
                Some(i + 1),
                format!("u_{} = {} and u_{} = {} are linearly dependent", i + 1, w[0], i + 2, w[1]),
            ));
        }
    }

    let index = lattice::lattice_index(&s.as_rows());
    let generates = index == Some(1);
    if !generates {
        let message = match index {
            Some(n) => format!("S generates a sublattice of index {n}"),
            None => "S spans a rank-1 sublattice".to_string(),
        };
        issues.push(Issue::new("generation", None, message));
    }

    Ok(SValidation {
        sector_normalized: sector,
        consecutive_independent: independent,
        generates_lattice: generates,
        index,
        issues,
    })
}

/// Convexity of `S`, the combinatorial form of negative-definiteness of the
/// intersection form: some choice of signs `ε_i` makes `ε_1 u_1, …, ε_k u_k`
/// turn strictly counter-clockwise at every step while staying within a
/// half-turn of `ε_1 u_1`. These are the outward normals of a convex polygon
/// whose remaining edge is at infinity.
#[allow(non_snake_case)]
pub fn is_convex(s: &CombinatorialData) -> Result<bool> {
    s.check_shape()?;
    Ok(convex_vectors(&s.vectors))
}

/// Brute force over `2^k` sign choices; no normalization assumed.
pub fn convex_vectors(vectors: &[LatticeVector]) -> bool {
    let k = vectors.len();
    if k < 2 || vectors.iter().any(|v| v.is_zero()) {
        return false;
    }
    // ε_1 = +1 without loss of generality: the criterion is invariant under a global flip.
    (0u64..1 << (k - 1)).any(|mask| {
        let w: Vec<LatticeVector> = vectors
            .iter()
            .enumerate()
            .map(|(i, &v)| if i > 0 && mask >> (i - 1) & 1 == 1 { -v } else { v })
            .collect();
        w.windows(2).all(|p| p[0].det(p[1]) > 0) && w[1..].iter().all(|&v| w[0].det(v) > 0)
    })
}

#[allow(non_snake_case)]
pub fn derive_T(s: &CombinatorialData) -> DerivedData {
    let k = s.k();
    let u = &s.vectors;
    let mut v = Vec::with_capacity(k);
    if k > 0 {
        v.push(u[0] + u[k - 1]);
        v.extend(u.windows(2).map(|w| w[1] - w[0]));
    }
    DerivedData::new(v)
}

#[allow(non_snake_case)]
pub fn recover_S(t: &DerivedData) -> Result<CombinatorialData> {
    t.doubled_reconstruction()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d.a % 2 != 0 || d.b % 2 != 0 {
                Err(Error::NonIntegralReconstruction { index: i + 1 })
            } else {
                Ok(LatticeVector::new(d.a / 2, d.b / 2))
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(CombinatorialData::new)
}

/// `b₂(M) = k − 2`.
pub fn b2(s: &CombinatorialData) -> usize {
    s.k().saturating_sub(2)
}

/// Boundary angles `0 = θ_1 < θ_2 < … < θ_k < π`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConformalData {
    pub theta: Vec<f64>,
}

impl ConformalData {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta }
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    /// `z_i = e^{iθ_i}`.
    pub fn z(&self) -> Vec<Complex64> {
        self.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }

    /// `ζ_i = z_i²`.
    pub fn zeta(&self) -> Vec<Complex64> {
        self.z().into_iter().map(|z| z * z).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RValidation {
    pub valid: bool,
    pub issues: Vec<Issue>,
    /// `z_i` as `[re, im]`.
    pub z: Vec<[f64; 2]>,
    pub zeta: Vec<[f64; 2]>,
}

#[allow(non_snake_case)]
pub fn validate_R(r: &ConformalData) -> RValidation {
    let mut issues = Vec::new();
    let th = &r.theta;
    if th.iter().any(|t| !t.is_finite()) {
        issues.push(Issue::new("finite", None, "angles must be finite"));
    }
    match th.first() {
        None => issues.push(Issue::new("first_angle", None, "no angles given")),
        Some(&t) if t != 0.0 => {
            issues.push(Issue::new("first_angle", Some(1), format!("theta_1 = {t} but must be 0")))
        }
        _ => {}
    }
    for (i, w) in th.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            issues.push(Issue::new(
                "strict_order",
                Some(i + 2),
                format!("theta_{} = {} is not greater than theta_{} = {}", i + 2, w[1], i + 1, w[0]),
            ));
        }
    }
    if let Some(&last) = th.last() {
        if !(last < PI) {
            issues.push(Issue::new("last_angle", Some(th.len()), format!("theta_k = {last} is not below pi")));
        }
    }
    let pair = |z: Complex64| [z.re, z.im];
    RValidation {
        valid: issues.is_empty(),
        issues,
        z: r.z().into_iter().map(pair).collect(),
        zeta: r.zeta().into_iter().map(pair).collect(),
    }
}
