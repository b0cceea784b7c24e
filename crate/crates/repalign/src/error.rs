use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition (shape mismatch,
    /// non-finite entries, out-of-range index, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is outside its valid range (e.g. a gradient
    /// descent step size at or above the stability limit).
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Batch gradient descent produced an increasing loss sequence,
    /// which signals a step size above the stability limit.
    #[error("gradient descent diverged at iteration {iter} (loss increased over {window} consecutive records)")]
    Diverged { iter: usize, window: usize },

    /// Network training hit a non-finite loss.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    /// A text input (CSV, config, checkpoint) failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An error raised inside one seed of a multi-seed experiment.
    #[error("seed {seed}: {source}")]
    WithSeed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
