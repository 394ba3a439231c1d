use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {op}: left {left:?}, right {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("invalid tensor shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },
    #[error("sequence input must not be empty")]
    EmptySequence,
    #[error("backward requires a scalar loss node, got shape {0:?}")]
    NotScalar((usize, usize)),
    #[error("non-finite gradient for parameter '{param}' (training guard)")]
    NonFiniteGrad { param: String },
    #[error("missing parameter '{name}' in parameter set")]
    MissingParam { name: String },
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },
}
