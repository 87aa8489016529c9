use thiserror::Error;

/// Errors shared across the whole laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register name collision: {0}")]
    NameCollision(String),
    #[error("unknown register: {0}")]
    UnknownRegister(String),
    #[error("register systems do not match: {0}")]
    SystemMismatch(String),
    #[error("dimension cap exceeded: {got} > {cap}")]
    DimCap { got: usize, cap: usize },
    #[error("state space too large: estimated {estimate} > cap {cap}")]
    Size { estimate: usize, cap: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("schedule exhausted without an output (max_rounds reached)")]
    MaxRounds,
    #[error("coin tape exhausted in exact mode")]
    CoinsExhausted,
    #[error("run failed at trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
