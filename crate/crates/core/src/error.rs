use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported degree {0} (expected 2..=8)")]
    UnsupportedDegree(usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("depth mismatch: {left} vs {right}")]
    DepthMismatch { left: usize, right: usize },

    #[error("vertex of depth {vertex_depth} exceeds portrait depth {depth}")]
    VertexTooDeep { vertex_depth: usize, depth: usize },

    #[error("letter {letter} out of range 1..={degree}")]
    LetterOutOfRange { letter: usize, degree: usize },

    #[error("malformed portrait encoding: {0}")]
    MalformedEncoding(String),

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("undeclared generator `{0}`")]
    UndeclaredGenerator(String),

    #[error("generator `{name}` has {found} sections, degree is {expected}")]
    SectionCount {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),

    #[error("generator index {0} out of range")]
    GeneratorOutOfRange(usize),

    #[error("element limit {limit} exceeded at level {level} ({partial} elements found so far)")]
    LimitExceeded { level: usize, limit: usize, partial: usize },

    #[error("portrait is not an element of the quotient")]
    NotInQuotient,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conditioning event has no mass")]
    EmptyCondition,

    #[error("element is not in the nucleus")]
    NotInNucleus,

    #[error("nucleus report is inconclusive")]
    InconclusiveNucleus,

    #[error("operation requires a group given by generators")]
    NeedsGenerators,

    #[error("cache file: {0}")]
    Cache(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
