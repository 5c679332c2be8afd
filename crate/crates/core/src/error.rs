use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {allowed:e}")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:e} below {allowed:e}")]
    NotPsd { min_eigenvalue: f64, allowed: f64 },

    #[error("eigensolver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("operator was registered against a different space")]
    SpaceMismatch,

    #[error("operator does not admit an A-adjoint (R(T*A) is not contained in R(A))")]
    NotInBA,

    #[error("operator is not A-bounded (it does not map N(A) into N(A))")]
    NotABounded,

    #[error("the space has rank 0; no vector has unit A-seminorm")]
    DegenerateSpace,

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),

    #[error("operand `{operand}` violates a membership requirement: {reason}")]
    MembershipViolated { operand: String, reason: String },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("empty input")]
    EmptyInput,

    #[error("parse error at line {line}, column {column}{}: {message}", field.as_ref().map(|f| format!(" (field `{f}`)")).unwrap_or_default())]
    Parse {
        line: usize,
        column: usize,
        field: Option<String>,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
