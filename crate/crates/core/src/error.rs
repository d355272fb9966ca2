use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid bandit problem: {0}")]
    InvalidProblem(String),

    #[error("family mismatch: cannot compare {0} with {1}")]
    FamilyMismatch(&'static str, &'static str),

    #[error("known parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("trajectory table would hold {rows} rows, above the cap of {cap}")]
    TableTooLarge { rows: u128, cap: u64 },

    #[error("strategy cannot be enumerated: {0}")]
    NotEnumerable(String),

    #[error("run {run} failed: {source}")]
    RunFailed { run: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
