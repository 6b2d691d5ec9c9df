use thiserror::Error;

/// Errors raised across the library. Variants map onto CLI exit codes
/// through [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("no rational candidate within bound: {0}")]
    NoCandidate(String),
    #[error("ambiguous reconstruction: {0}")]
    Ambiguous(String),
    #[error("{0} is not coprime to {1}")]
    NotCoprime(i64, i64),
    #[error("tail not certified: {0}")]
    TailNotCertified(String),
    #[error("missing character: {0}")]
    MissingCharacter(String),
    #[error("inconsistent values: {0}")]
    Inconsistent(String),
    #[error("not certifiable at current truncation/precision: {0}")]
    Uncertifiable(String),
    #[error("series is not bounded: {0}")]
    NotBounded(String),
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("trivial character: {0}")]
    TrivialCharacter(String),
    #[error("missing lambda entry: {0}")]
    MissingLambda(String),
    #[error("nonzero residual alpha component: {0}")]
    ResidualAlpha(String),
    #[error("no unit normalizes the Grossencharacter: {0}")]
    NoValidUnit(String),
    #[error("prime is ramified: {0}")]
    Ramified(String),
    #[error("bad reduction at {0}")]
    BadReduction(i64),
    #[error("singular curve")]
    Singular,
    #[error("root number check failed: {0}")]
    RootNumber(String),
    #[error("insufficient coefficients: need {need}, have {have}")]
    InsufficientCoefficients { need: usize, have: usize },
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("not covered by interpolation: {0}")]
    NotCovered(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("identity failure: {0}")]
    Identity(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) | Error::TailNotCertified(_) | Error::Uncertifiable(_) => 2,
            Error::Config(_) | Error::Usage(_) | Error::Format { .. } | Error::Io(_) => 4,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
