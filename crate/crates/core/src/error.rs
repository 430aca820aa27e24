use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("column index {index} out of range for {cols} columns")]
    IndexOutOfRange { index: usize, cols: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("oblique step needs two distinct columns, got {0} twice")]
    SameIndex(usize),

    #[error("method needs at least {needed} columns, matrix has {cols}")]
    TooFewColumns { needed: usize, cols: usize },

    #[error("stop mode requires {0}, which was not provided")]
    MissingMetadata(&'static str),

    #[error("invalid stop rule: {0}")]
    InvalidStopRule(&'static str),

    #[error("invalid oblique configuration: epsilon must be finite and nonnegative")]
    InvalidEpsilon,

    #[error("right-hand side is the zero vector")]
    ZeroRhs,

    #[error("reference solution is the zero vector")]
    ZeroReference,

    #[error("entry interval lower bound {0} outside [0, 1)")]
    BadInterval(f64),

    #[error("null space of A^T is numerically empty")]
    NullSpaceEmpty,

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("matrix is numerically zero")]
    ZeroMatrix,

    #[error("smallest nonzero singular value is undefined")]
    DegenerateRank,

    #[error("columns are not unit norm (column {0})")]
    NotUnitized(usize),

    #[error("column {0} is parallel to every admissible partner")]
    ParallelColumns(usize),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{0}")]
    Io(String),

    #[error("invalid benchmark configuration: {0}")]
    BadConfig(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
