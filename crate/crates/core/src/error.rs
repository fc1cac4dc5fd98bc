use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("invalid fractional order {0}")]
    InvalidOrder(f64),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("requested derivative of order {requested} exceeds declared jet order {declared}")]
    JetOrder { requested: usize, declared: usize },

    #[error("kernel function provides derivatives up to order {available}, {requested} required")]
    MissingPsiDerivative { requested: usize, available: usize },

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("finite-difference stencil [{lo}, {hi}] leaves the kernel range [{min}, {max}]")]
    Stencil { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("unbound variable `{0}`")]
    Unbound(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("not implemented: {0}")]
    NotImplemented(&'static str),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
