use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequence too short: need at least {needed} states, got {got}")]
    SequenceTooShort { needed: usize, got: usize },

    #[error("invalid alphabet size {0}")]
    InvalidAlphabet(usize),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("no transitions to condition on")]
    NoTransitions,

    #[error("invalid count: {0}")]
    InvalidCount(String),

    #[error("bias terms and report disagree: {0}")]
    MismatchedProvenance(String),

    #[error("at least {needed} replicates are required, got {got}")]
    InsufficientReplicates { needed: usize, got: usize },

    #[error("samples have zero pooled variance")]
    DegenerateVariance,

    #[error("sample of size {0} is too small for a t-test")]
    SampleTooSmall(usize),

    #[error("invalid rate {0}: must lie in [0, 1)")]
    InvalidRate(f64),

    #[error("mark-off leaves {retained} states, at least 2 are required")]
    TooFewRemaining { retained: usize },

    #[error("invalid Markov spec: {0}")]
    InvalidSpec(String),

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("oracle limited to {limit} states, got {got}")]
    OracleScaleExceeded { limit: usize, got: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
