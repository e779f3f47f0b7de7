use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("sensing ledger is empty")]
    EmptyLedger,
    #[error("iteration {iteration} out of range, {recorded} rounds recorded")]
    IterationOutOfRange { iteration: usize, recorded: usize },
    #[error("no channel has a defined estimate")]
    NoObservedChannel,
    #[error("channel {channel}: CBR {value} outside [0, 1]")]
    InvalidCbr { channel: usize, value: f64 },
    #[error("need at least {min} channels, got {got}")]
    TooFewChannels { min: usize, got: usize },
    #[error("allocation sums to {got}, budget is {budget}")]
    BudgetMismatch { got: u64, budget: u64 },
    #[error("length {got} does not match channel count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cumulative sample count must be at least 1")]
    ZeroSamples,
    #[error("distribution needs a non-empty support")]
    EmptyDistribution,
    #[error("masses sum to {0}, expected 1")]
    MassSum(f64),
    #[error("support values must be strictly increasing")]
    UnsortedSupport,
    #[error("joint state space of {size} outcomes exceeds cap {cap}")]
    StateSpace { size: u128, cap: u128 },
    #[error("enumerating {count} allocations exceeds cap {cap}")]
    EnumerationCap { count: u128, cap: u128 },
    #[error("gamma must be <= 0, got {0}")]
    InvalidGamma(f64),
    #[error("alpha must be in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("memory window must be at least 1")]
    InvalidWindow,
    #[error("{path}: parse error at line {line}: {message}")]
    TraceParse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
