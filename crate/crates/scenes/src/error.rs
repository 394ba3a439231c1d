use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    /// The scene JSON was malformed or missing required fields.
    #[error("scene parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },
    /// The scene parsed but describes an unusable world.
    #[error("invalid scene '{scene}': {msg}")]
    Invalid { scene: String, msg: String },
    /// Rejection sampling ran out of attempts while instantiating the scene.
    #[error("scene '{scene}': failed to place {what} after {tries} attempts")]
    Infeasible {
        scene: String,
        what: &'static str,
        tries: u32,
    },
    #[error("unknown scene '{0}'")]
    UnknownScene(String),
}
