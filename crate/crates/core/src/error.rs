use thiserror::Error;

/// Errors raised by the hardcore library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid is missing required breakpoint {0}")]
    MissingBreakpoint(f64),

    #[error("normalizing integral underflowed to zero at depth {depth}")]
    RatioUnderflow { depth: usize },

    #[error("derivative values are required but absent")]
    MissingDerivative,

    #[error("integration failed to reach level {level} before z = {limit}")]
    ThresholdNotReached { level: f64, limit: f64 },

    #[error("bisection bracket could not be expanded: {0}")]
    Bracket(String),

    #[error("rewire precondition failed: distance({u1}, {u2}) = {distance} < 4")]
    RewireDistance { u1: usize, u2: usize, distance: usize },

    #[error("rewire chain invariant violated at step {step}: {reason}\n{snapshot}")]
    ChainInvariant {
        step: usize,
        reason: String,
        snapshot: String,
    },

    #[error("graph error: {0}")]
    Graph(String),

    #[error("pairing model exceeded {0} retries")]
    PairingRetries(usize),

    #[error("sampling produced a zero-weight cap under measure {0}")]
    ZeroWeight(String),

    #[error("measure has atoms; {0} requires a pure density")]
    AtomsNotSupported(&'static str),

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
