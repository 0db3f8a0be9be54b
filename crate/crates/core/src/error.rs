use thiserror::Error;

/// Failures raised by the numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: n_max {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("pair-basis offset mismatch: {left} vs {right}")]
    OffsetMismatch { left: usize, right: usize },

    #[error("invalid parameter {name} = {value}: expected {expected}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("truncation cap n_max = {n_max} reached with tail mass {tail:e} (target {target:e})")]
    TruncationExhausted { n_max: usize, tail: f64, target: f64 },

    #[error("non-finite diagonal value at n = {n}")]
    NonFinite { n: usize },

    #[error("state has support below n = {m} (first nonzero at n = {first})")]
    SupportBelow { m: usize, first: usize },

    #[error("norm leakage {leak:e} at truncation boundary n_max = {n_max}")]
    Leakage { n_max: usize, leak: f64 },

    #[error("series did not converge: tail bound {bound:e} after {terms} terms")]
    NonConvergence { terms: usize, bound: f64 },

    #[error("moment has imaginary part {imag:e}; quadrature formulas assume real moments")]
    ComplexMoment { imag: f64 },

    #[error("mean photon number is zero; Mandel Q is undefined for the vacuum")]
    Vacuum,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            expected,
        }
    }

    /// True for failures caused by truncation or series convergence rather
    /// than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationExhausted { .. }
                | Error::Leakage { .. }
                | Error::NonConvergence { .. }
                | Error::NonFinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
