use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("two-qubit gate applied to the same qubit {0} twice")]
    DuplicateQubits(usize),
    #[error("parameter slot {slot} out of range ({len} parameters)")]
    ParamSlotOutOfRange { slot: usize, len: usize },
    #[error("number of shots must be at least 1")]
    ZeroShots,
    #[error("infeasible graph specification: {0}")]
    InfeasibleGraph(String),
    #[error("no connected graph found within {0} seeds")]
    NoConnectedGraph(u64),
    #[error("penalty must be positive, got {0}")]
    NonPositivePenalty(f64),
    #[error("maximum cut has no penalty term")]
    UnconstrainedProblem,
    #[error("expected {expected} binary variables, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("brute-force enumeration limited to {limit} variables, got {n}")]
    TooManyVariables { n: usize, limit: usize },
    #[error("invalid action space: {0}")]
    InvalidActionSpace(String),
    #[error("action {action} out of range ({len} actions)")]
    ActionOutOfRange { action: usize, len: usize },
    #[error("episode already terminated")]
    EpisodeTerminated,
    #[error("history is empty")]
    EmptyHistory,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("input of width {got} does not match network width {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("non-finite gradient during policy or value update")]
    NonFiniteGradient,
    #[error("QAOA depth must be at least 1")]
    InvalidDepth,
    #[error("degenerate instance: minimum and maximum energy coincide at {0}")]
    DegenerateInstance(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing input file {0}")]
    MissingFile(PathBuf),
    #[error("no records to report")]
    NoRecords,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
