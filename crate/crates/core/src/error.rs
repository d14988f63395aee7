use thiserror::Error;

/// Errors surfaced by parsing, evaluation, quadrature, and certification.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("unknown function `{0}` (only `exp` and `log` may be applied)")]
    UnknownFunction(String),
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("domain error evaluating expression: {0}")]
    Domain(String),
    #[error("invalid denominator spec: {0}")]
    InvalidSpec(String),
    #[error("integral did not converge: {0}")]
    QuadNonconvergence(String),
    #[error("tail integral diverges")]
    DivergentIntegral,
    #[error("inverse target below g(1); hypothesis floor violated")]
    RangeBelowGOne,
    #[error("constraint block is singular: {0}")]
    SingularConstraints(String),
    #[error("gram matrix lost positive-definiteness (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
