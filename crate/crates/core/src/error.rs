use thiserror::Error;

/// Errors raised across the library.
///
/// Every variant maps onto one of the failure classes the CLI reports with
/// exit status 2 (precondition or parse failure).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid partial quotient at index {index}: {value}")]
    InvalidQuotient { index: usize, value: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("depth error: need {needed} terms, have {available}")]
    Depth { needed: usize, available: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("family is not fusing at depth {depth} within horizon {horizon}")]
    NotFusing { depth: usize, horizon: usize },

    #[error("trace is not faithful: block {block} has weight {weight:e}")]
    NotFaithful { block: usize, weight: f64 },

    #[error("precision error: {0}")]
    Precision(String),

    #[error("element is not self-adjoint (deviation {deviation:e})")]
    NotSelfAdjoint { deviation: f64 },

    #[error("conditioning error: {0}")]
    Conditioning(String),

    #[error("hypothesis error: {0}")]
    Hypothesis(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("schema error: expected version {expected}, found {found}")]
    Schema { expected: u32, found: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in structured error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::InvalidQuotient { .. } => "invalid-quotient",
            Error::Domain(_) => "domain",
            Error::Depth { .. } => "depth",
            Error::IndexOutOfRange(_) => "index-out-of-range",
            Error::NotFusing { .. } => "not-fusing-at-depth",
            Error::NotFaithful { .. } => "not-faithful",
            Error::Precision(_) => "precision",
            Error::NotSelfAdjoint { .. } => "not-self-adjoint",
            Error::Conditioning(_) => "conditioning",
            Error::Hypothesis(_) => "hypothesis",
            Error::Config(_) => "config",
            Error::Structural(_) => "structural",
            Error::Schema { .. } => "schema",
            Error::Parse(_) => "parse",
            Error::Solver(_) => "solver",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
