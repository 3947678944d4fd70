//! Cell-centred grids over the upper half-plane `{(x̃, ỹ) : ỹ > 0}` and sign
//! bookkeeping for scalar fields sampled on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::toric_data::ConformalData;

pub const DEFAULT_GRID: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
}

impl GridSpec {
    pub fn new(n: usize, x_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max) || !(y_max > 0.0) || !x_min.is_finite() || !x_max.is_finite() || !y_max.is_finite() {
            return Err(Error::Input(format!(
                "bad grid window x in [{x_min}, {x_max}], y in (0, {y_max}]"
            )));
        }
        Ok(Self { n, x_min, x_max, y_max })
    }

    /// `x̃ ∈ [min p − 2, max p + 2]`, `ỹ ∈ (0, span + 2]` over the finite `p_i = cot θ_i`.
    pub fn around(r: &ConformalData, n: usize) -> Self {
        let ps: Vec<f64> = r.theta.iter().filter(|t| t.sin() > 0.0).map(|t| t.cos() / t.sin()).collect();
        let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        Self {
            n,
            x_min: lo - 2.0,
            x_max: hi + 2.0,
            y_max: hi - lo + 2.0,
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        self.x_min + (ix as f64 + 0.5) * (self.x_max - self.x_min) / self.n as f64
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        (iy as f64 + 0.5) * self.y_max / self.n as f64
    }

    /// Row-major over `iy`, then `ix`.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.n).flat_map(move |iy| {
            (0..self.n).map(move |ix| Cell {
                ix,
                iy,
                x: self.x_at(ix),
                y: self.y_at(iy),
            })
        })
    }

    /// Evaluate `f` on every cell in parallel; results in `cells()` order.
    pub fn evaluate<T, F>(&self, f: F) -> Vec<(Cell, T)>
    where
        T: Send,
        F: Fn(&Cell) -> T + Sync,
    {
        let cells: Vec<Cell> = self.cells().collect();
        cells.into_par_iter().map(|c| (c, f(&c))).collect()
    }
}

/// Extremes and sign structure of a sampled scalar field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSummary {
    pub samples: usize,
    pub min_abs: f64,
    pub positive: usize,
    pub negative: usize,
    /// Values with `|v| ≤ tol`.
    pub near_zero: usize,
    /// Adjacent cell pairs (horizontal or vertical) with strictly opposite signs.
    pub sign_changes: usize,
}

impl SignSummary {
    /// `values` is row-major `n × n` (or a single row when `n_rows == 1`).
    pub fn of_grid(values: &[f64], n_cols: usize, tol: f64) -> Self {
        let samples = values.len();
        let min_abs = values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        let positive = values.iter().filter(|&&v| v > tol).count();
        let negative = values.iter().filter(|&&v| v < -tol).count();
        let near_zero = samples - positive - negative;
        let sign = |v: f64| if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 };
        let mut sign_changes = 0;
        if n_cols > 0 {
            for (idx, &v) in values.iter().enumerate() {
                let right = (idx % n_cols + 1 < n_cols).then(|| idx + 1);
                let up = Some(idx + n_cols).filter(|&j| j < samples);
                for j in [right, up].into_iter().flatten() {
                    if sign(v) * sign(values[j]) < 0 {
                        sign_changes += 1;
                    }
                }
            }
        }
        Self {
            samples,
            min_abs: if samples == 0 { 0.0 } else { min_abs },
            positive,
            negative,
            near_zero,
            sign_changes,
        }
    }

    /// All values clear of zero and of one sign.
    pub fn definite(&self) -> bool {
        self.near_zero == 0 && (self.positive == 0 || self.negative == 0)
    }
}
