//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("polynomial degree {found} exceeds pseudo-expectation degree {bound}")]
    DegreeOverflow { found: usize, bound: usize },

    #[error("operation requires degree > {required}, pseudo-expectation has degree {found}")]
    DegreeTooLow { required: usize, found: usize },

    #[error("conditioning on X_{var} = {sign:+} is near-deterministic (denominator {denom:.3e})")]
    NearDeterministic { var: usize, sign: i8, denom: f64 },

    #[error("moment matrix violates positivity: min eigenvalue {min_eig:.3e} below -{tol:.3e}")]
    PsdViolation { min_eig: f64, tol: f64 },

    #[error("instance size {n} exceeds cap {cap} for exact search")]
    SizeCap { n: usize, cap: usize },

    #[error("binary search bracket error: builder({hi}) is not feasible")]
    BracketError { hi: f64 },

    #[error("solver returned indeterminate (iteration limit at residual {residual:.3e})")]
    Indeterminate { residual: f64 },

    #[error("separated-set search failed: {0}")]
    ArvFailure(String),

    #[error("point set has zero volume")]
    ZeroVolume,

    #[error("conditioning budget exhausted with {remaining_bad} bad vertices remaining")]
    BudgetExhausted { remaining_bad: usize },

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
