use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] autonn::NnError),
    /// A checkpoint loaded cleanly but does not match the configured
    /// architecture.
    #[error("checkpoint {file}: {msg}")]
    BadCheckpoint { file: String, msg: String },
}
