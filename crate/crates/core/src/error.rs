use thiserror::Error;

/// Errors produced by the aggregation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("universe is empty")]
    EmptyUniverse,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("not a permutation: {0}")]
    NotAPermutation(String),
    #[error("rankings are over different universes")]
    UniverseMismatch,
    #[error("rank {rank} outside [1, {padded}]")]
    RankOutOfRange { rank: usize, padded: usize },
    #[error("no ranking has been pushed yet")]
    EmptyStream,
    #[error("dispersion phi = {0} outside (0, 1]")]
    PhiOutOfRange(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("non-numeric grade `{value}` for `{student}`")]
    NonNumericGrade { student: String, value: String },
    #[error("row `{student}` has {found} grades, expected {expected}")]
    RaggedRows {
        student: String,
        found: usize,
        expected: usize,
    },
    #[error("assignment oracle limited to n <= {limit}, got n = {n}")]
    OracleTooLarge { n: usize, limit: usize },
    #[error("stream already holds the maximum of {limit} rankings")]
    StreamFull { limit: u64 },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Wraps the error with a 1-based input line number.
    pub fn at_line(self, line: usize) -> Self {
        Error::AtLine {
            line,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping line annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
