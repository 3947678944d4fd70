use thiserror::Error;

/// Errors raised by the construction. Mathematical-condition failures that are
/// part of a normal report (a failed check) are not errors; these are raised
/// when an operation cannot be evaluated at all.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("need at least 3 lattice vectors, got {0}")]
    TooFewVectors(usize),

    #[error("lattice vector {index} is zero")]
    ZeroVector { index: usize },

    #[error("half-sum reconstruction of u_{index} is not integral")]
    NonIntegralReconstruction { index: usize },

    #[error("lengths differ: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("rank of Omega is {0}, expected 2")]
    RankDeficient(usize),

    #[error("Re(z) and Im(z) are linearly dependent")]
    DependentConformalData,

    #[error("fibre action by the zero quaternion")]
    ZeroQuaternion,

    #[error("axis must be 1, 2 or 3, got {0}")]
    BadAxis(u8),

    #[error("f^p evaluated at its singular point ({p}, 0)")]
    SingularPoint { p: f64 },

    #[error("target for slot {index} is zero; the orbit degenerates there")]
    DegenerateTarget { index: usize },

    #[error("{count} coordinates vanish; at most one |q_i| = 0 is supported")]
    TooManyVanishing { count: usize },

    #[error("z = {z} is a pole or zero of Psi (coincides with +/- z_{index})")]
    Pole { z: String, index: usize },

    #[error("vertical space has rank {rank}, expected {expected}")]
    VerticalRankDeficient { rank: usize, expected: usize },

    #[error("transversality margin {margin:e} below threshold {threshold:e}")]
    IllConditioned { margin: f64, threshold: f64 },

    #[error("kernel of d(mu) has dimension {got}, expected {expected}")]
    KernelDimension { got: usize, expected: usize },

    #[error("q_1 vanishes at this point")]
    FixedPointExcluded,

    #[error("index {index} out of range 1..={k}")]
    IndexOutOfRange { index: usize, k: usize },

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
