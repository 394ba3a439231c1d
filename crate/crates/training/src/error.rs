use thiserror::Error;

/// Failures across both training stages.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Nn(#[from] autonn::NnError),

    #[error(transparent)]
    Model(#[from] models::ModelError),

    #[error(transparent)]
    Scene(#[from] scenes::SceneError),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad training config: {msg}")]
    Config { msg: String },

    #[error("config parse error at line {line}, column {column}: {msg}")]
    ConfigParse { line: usize, column: usize, msg: String },

    #[error("demonstration dataset is unusable: {msg}")]
    Dataset { msg: String },

    #[error("non-finite {what} at iteration {iter}; aborting")]
    NonFinite { what: &'static str, iter: usize },
}
