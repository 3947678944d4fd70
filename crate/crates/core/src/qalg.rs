//! Quaternion arithmetic and the flat hypercomplex model on `H^k / ±1`.
//!
//! A quaternion `q = w + a i + b j + c k` is stored with its components and
//! split as `q = x + y j` with `x = w + a i`, `y = b + c i`. The three complex
//! structures `I_1, I_2, I_3` are left multiplication by `i`, `j`, `k`; in split
//! coordinates `I_1 (x, y) = (ix, iy)` and `I_2 (x, y) = (-conj y, conj x)`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, a: f64, b: f64, c: f64) -> Self {
        Self { w, a, b, c }
    }

    pub fn real(w: f64) -> Self {
        Self::new(w, 0.0, 0.0, 0.0)
    }

    /// Unit imaginary quaternion for axis 1, 2, 3.
    pub fn unit(axis: u8) -> Result<Self> {
        match axis {
            1 => Ok(Self::I),
            2 => Ok(Self::J),
            3 => Ok(Self::K),
            other => Err(Error::BadAxis(other)),
        }
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.a, -self.b, -self.c)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.a * self.a + self.b * self.b + self.c * self.c
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.w == 0.0 && self.a == 0.0 && self.b == 0.0 && self.c == 0.0
    }

    pub fn split(self) -> ComplexSplit {
        ComplexSplit {
            x: Complex64::new(self.w, self.a),
            y: Complex64::new(self.b, self.c),
        }
    }

    pub fn components(self) -> [f64; 4] {
        [self.w, self.a, self.b, self.c]
    }
}

/// Hamilton product.
pub fn quat_mul(p: Quaternion, q: Quaternion) -> Quaternion {
    Quaternion::new(
        p.w * q.w - p.a * q.a - p.b * q.b - p.c * q.c,
        p.w * q.a + p.a * q.w + p.b * q.c - p.c * q.b,
        p.w * q.b - p.a * q.c + p.b * q.w + p.c * q.a,
        p.w * q.c + p.a * q.b - p.b * q.a + p.c * q.w,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w + rhs.w, self.a + rhs.a, self.b + rhs.b, self.c + rhs.c)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w - rhs.w, self.a - rhs.a, self.b - rhs.b, self.c - rhs.c)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.a, -self.b, -self.c)
    }
}

/// `q = x + y j` with `x, y` complex with respect to `I_1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexSplit {
    pub x: Complex64,
    pub y: Complex64,
}

impl ComplexSplit {
    pub fn new(x: Complex64, y: Complex64) -> Self {
        Self { x, y }
    }

    pub fn from_parts(xr: f64, xi: f64, yr: f64, yi: f64) -> Self {
        Self::new(Complex64::new(xr, xi), Complex64::new(yr, yi))
    }

    pub fn quaternion(self) -> Quaternion {
        Quaternion::new(self.x.re, self.x.im, self.y.re, self.y.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    /// Left multiplication by `i`, `j` or `k`.
    pub fn left(self, axis: u8) -> Result<Self> {
        let i = Complex64::i();
        Ok(match axis {
            1 => Self::new(i * self.x, i * self.y),
            2 => Self::new(-self.y.conj(), self.x.conj()),
            3 => Self::new(-i * self.y.conj(), i * self.x.conj()),
            other => return Err(Error::BadAxis(other)),
        })
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// A point of `H^k / {±(1,…,1)}`.
///
/// Stored as a representative; `PartialEq` compares canonical representatives.
#[derive(Debug, Clone, Default)]
pub struct UPoint {
    pub coords: Vec<ComplexSplit>,
}

impl UPoint {
    pub fn new(coords: Vec<ComplexSplit>) -> Self {
        Self { coords }
    }

    pub fn zero(k: usize) -> Self {
        Self::new(vec![ComplexSplit::default(); k])
    }

    pub fn from_quaternions(qs: &[Quaternion]) -> Self {
        Self::new(qs.iter().map(|q| q.split()).collect())
    }

    pub fn quaternions(&self) -> Vec<Quaternion> {
        self.coords.iter().map(|s| s.quaternion()).collect()
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords
            .iter()
            .all(|s| s.x == Complex64::default() && s.y == Complex64::default())
    }

    /// `Σ |q_i|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|s| s.norm_sqr()).sum()
    }

    /// `|q_i|²` for every slot.
    pub fn slot_norms_sqr(&self) -> Vec<f64> {
        self.coords.iter().map(|s| s.norm_sqr()).collect()
    }

    pub fn negate(&self) -> Self {
        Self::new(self.coords.iter().map(|s| s.neg()).collect())
    }

    /// Representative whose first nonzero complex entry (scanning
    /// `x_1, y_1, x_2, …`) has argument in `[0, π)`.
    pub fn canonical(&self) -> Self {
        for s in &self.coords {
            for z in [s.x, s.y] {
                if z.re != 0.0 || z.im != 0.0 {
                    let flip = z.im < 0.0 || (z.im == 0.0 && z.re < 0.0);
                    return if flip { self.negate() } else { self.clone() };
                }
            }
        }
        self.clone()
    }

    /// Real coordinates in `R^{4k}`, slot-major `(Re x, Im x, Re y, Im y)`.
    pub fn to_real(&self) -> DVector<f64> {
        DVector::from_iterator(
            4 * self.k(),
            self.coords
                .iter()
                .flat_map(|s| [s.x.re, s.x.im, s.y.re, s.y.im]),
        )
    }

    pub fn from_real(v: &DVector<f64>) -> Self {
        assert_eq!(v.len() % 4, 0, "real vector length must be a multiple of 4");
        Self::new(
            (0..v.len() / 4)
                .map(|i| ComplexSplit::from_parts(v[4 * i], v[4 * i + 1], v[4 * i + 2], v[4 * i + 3]))
                .collect(),
        )
    }

    /// Equality modulo `±1` within `tol · max(1, Σ|q_i|²)^{1/2}`.
    pub fn approx_eq(&self, other: &UPoint, tol: f64) -> bool {
        if self.k() != other.k() {
            return false;
        }
        let a = self.to_real();
        let b = other.to_real();
        let scale = self.norm_sqr().max(other.norm_sqr()).max(1.0).sqrt();
        (&a - &b).norm().min((&a + &b).norm()) <= tol * scale
    }
}

impl PartialEq for UPoint {
    fn eq(&self, other: &Self) -> bool {
        self.k() == other.k() && self.canonical().coords == other.canonical().coords
    }
}

/// `I_axis` applied to every quaternion coordinate.
#[allow(non_snake_case)]
pub fn left_I(axis: u8, p: &UPoint) -> Result<UPoint> {
    Ok(UPoint::new(
        p.coords.iter().map(|s| s.left(axis)).collect::<Result<_>>()?,
    ))
}

/// `I_axis` acting on a real tangent vector in `R^{4k}`.
pub fn left_real(axis: u8, v: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(left_I(axis, &UPoint::from_real(v))?.to_real())
}

/// Left multiplication of every coordinate by `c ∈ H*`, the fibre action of
/// `CO(3) = H*/±1`.
pub fn fiber_act(c: Quaternion, p: &UPoint) -> Result<UPoint> {
    if c.is_zero() {
        return Err(Error::ZeroQuaternion);
    }
    Ok(UPoint::new(
        p.coords
            .iter()
            .map(|s| quat_mul(c, s.quaternion()).split())
            .collect(),
    ))
}
