use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// A strict comparison could not be separated before the enclosure width
    /// fell below the requested precision.
    #[error("indeterminate comparison: {0}")]
    Indeterminate(String),

    #[error("enclosure oracle failure: {0}")]
    Oracle(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("cannot parse expression `{expr}`: {detail}")]
    ParseExpr { expr: String, detail: String },

    #[error("malformed building at level {level}, word {word}: {detail}")]
    MalformedBuilding {
        level: usize,
        word: usize,
        detail: String,
    },

    #[error("level {level} out of range (levels {first}..={last})")]
    LevelOutOfRange {
        level: usize,
        first: usize,
        last: usize,
    },

    #[error("word {word} out of range at level {level} ({count} words)")]
    WordOutOfRange {
        level: usize,
        word: usize,
        count: usize,
    },

    #[error("level {level} does not have constant length")]
    NotConstantLength { level: usize },

    #[error("expansion of word {word} at level {level} has {length} letters, above the limit of {limit}")]
    TooLong {
        level: usize,
        word: usize,
        length: String,
        limit: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("inconsistent measure: {0}")]
    InconsistentMeasure(String),

    #[error("shift {shift} out of range for word {word} at level {level} (length {length})")]
    ShiftOutOfRange {
        level: usize,
        word: usize,
        shift: String,
        length: String,
    },

    #[error("infeasible construction at level {level}: {state}")]
    Infeasible { level: usize, state: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("gsq line {line}: {msg}")]
    Gsq { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Error::Indeterminate(_))
    }
}
