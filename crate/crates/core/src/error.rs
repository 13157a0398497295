use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("state space exceeds the cap ({states} states, {transitions} transitions)")]
    CapExceeded { states: u64, transitions: u64 },

    #[error("time budget exhausted after {states} states")]
    Timeout { states: u64 },

    #[error("unknown state {0}")]
    UnknownState(u32),

    #[error("label {0} is not in the declared alphabet")]
    LabelNotInAlphabet(String),

    #[error("empty component list")]
    NoComponents,

    #[error("register {register}: {reason}")]
    Guard { register: String, reason: String },

    #[error("invalid register config {register}: {reason}")]
    RegisterConfig { register: String, reason: String },

    #[error("thread {thread}: {reason}")]
    Compile { thread: u8, reason: String },

    #[error("unknown algorithm {name}/{variant} with {threads} threads")]
    UnknownAlgorithm { name: String, variant: String, threads: usize },

    #[error("lasso does not replay: {0}")]
    Replay(String),

    #[error("model has {states} states, above the oracle bound {bound}")]
    TooLarge { states: usize, bound: usize },

    #[error("witness construction failed: {0}")]
    Witness(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}
