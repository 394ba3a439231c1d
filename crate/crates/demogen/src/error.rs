use thiserror::Error;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error(transparent)]
    Scene(#[from] scenes::SceneError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// A trajectory file was malformed at the given byte offset.
    #[error("trajectory file error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },
    /// Too few episodes survived cleaning within the retry budget.
    #[error("generated only {got} of {want} demonstrations after {attempts} attempts")]
    Exhausted {
        got: usize,
        want: usize,
        attempts: usize,
    },
}
