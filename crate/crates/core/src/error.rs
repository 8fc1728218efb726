use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("architecture mismatch: {0}")]
    Architecture(String),

    #[error("empty observation window")]
    EmptyWindow,

    #[error("invalid choice for agent {agent}: {reason}")]
    Choice { agent: usize, reason: String },

    #[error("unknown agent kind `{0}`")]
    UnknownAgent(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown figure `{0}`")]
    UnknownFigure(String),

    #[error("cannot aggregate an empty list of runs")]
    EmptyAggregate,

    #[error("{path}: line {line}: {msg}")]
    Malformed { path: String, line: u64, msg: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
