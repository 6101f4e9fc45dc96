use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{source_name}:{line}:{col}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("malformed system: {0}")]
    Structure(String),

    #[error("level {level} out of range (max {max})")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("vertex index {index} out of range at level {level} (m = {size})")]
    VertexOutOfRange {
        level: usize,
        index: usize,
        size: usize,
    },

    /// A computation needs a level beyond the truncation.
    #[error("depth budget exhausted: level {needed} needed, truncation depth is {depth}")]
    DepthBudget { needed: usize, depth: usize },

    #[error("inadmissible: {0}")]
    Inadmissible(String),

    #[error("not left-resolving: {0}")]
    NotLeftResolving(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("compatibility fails at level {level}: {detail}")]
    Compatibility { level: usize, detail: String },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
