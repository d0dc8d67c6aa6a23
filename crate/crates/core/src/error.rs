use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Alphabets or table shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A variable name was not found in a joint distribution or system.
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    /// Variable groups that must be disjoint overlap.
    #[error("overlapping variable groups: {0}")]
    OverlappingGroups(String),

    /// A probability table row does not sum to one.
    #[error("row-sum violation: {0}")]
    RowSum(String),

    /// A dense table would exceed the entry cap.
    #[error("table too large: {entries} entries exceeds cap {cap}")]
    TableTooLarge { entries: u128, cap: u64 },

    /// Enumeration would produce too many points.
    #[error("enumeration too large: {count} points exceeds cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u64 },

    /// Text input failed to parse.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
