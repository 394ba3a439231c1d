use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    /// Raised before any episode runs so a bad path fails fast.
    #[error("checkpoint file not found: {path}")]
    MissingCheckpoint { path: PathBuf },
    #[error(transparent)]
    Model(#[from] models::ModelError),
    #[error(transparent)]
    Scene(#[from] scenes::SceneError),
    #[error(transparent)]
    Sim(#[from] simworld::SimError),
    #[error(transparent)]
    Nn(#[from] autonn::NnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{msg}")]
    Invalid { msg: String },
}

impl EvalError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::Invalid { msg: msg.into() }
    }
}
