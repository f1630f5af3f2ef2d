//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A variance (or a quantity required to be positive, like a
    /// normalization total) was zero, negative, or not finite.
    #[error("NonPositiveVariance: expected a strictly positive finite value, got {value}")]
    NonPositiveVariance { value: f64 },

    /// A Gram matrix failed the positive semidefiniteness check.
    #[error("NotPSD: determinant {det} below tolerance -{tol}")]
    NotPSD { det: f64, tol: f64 },

    /// Eigenvalues violated the ordering l1 >= l2 >= 0 or were not finite.
    #[error("InvalidEigenOrder: ({l1}, {l2}) is not an ordered nonnegative pair")]
    InvalidEigenOrder { l1: f64, l2: f64 },

    /// Parameters of a closed form coincide within the distinctness
    /// tolerance, so the expression is 0/0 in floating point.
    #[error("DegenerateParameters: {what} (retry with distinct values or use perturb_distinct)")]
    DegenerateParameters { what: String },

    /// An argument was outside the mathematical domain of the function.
    #[error("DomainError: {what}")]
    DomainError { what: String },

    /// Node-doubling refinement hit its cap before two successive estimates
    /// agreed to the requested relative tolerance.
    #[error("QuadratureNoConvergence: last estimates {previous} and {last} differ beyond tolerance")]
    QuadratureNoConvergence { previous: f64, last: f64 },

    /// A statistic was requested from an empty sample.
    #[error("EmptySample: statistic requires at least one sample")]
    EmptySample,

    /// The channel realization is numerically singular, so zero-forcing
    /// SNRs are not representable.
    #[error("SingularChannel: |det W| = {det} is below 1e-300")]
    SingularChannel { det: f64 },
}

impl Error {
    /// Process exit code used by the CLI for this error.
    pub fn exit_code(&self) -> i32 {
        3
    }
}
