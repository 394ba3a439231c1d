//! Dense-tensor reverse-mode autodiff with the layers used by the
//! navigation stack: tanh MLPs, a single-layer LSTM, and Adam.
//!
//! Everything runs on f64. A training step records its forward pass on a
//! fresh [`Tape`], calls [`Tape::backward`] once, and feeds the resulting
//! [`Grads`] to [`Adam::step`]. Parameters live in [`ParamSet`]s that
//! serialize to a small binary checkpoint format via [`save_params`] /
//! [`load_params`].

mod checkpoint;
mod error;
pub mod gradcheck;
mod nn;
mod params;
mod tape;
mod tensor;

pub use checkpoint::{load_params, save_params};
pub use error::NnError;
pub use nn::{LstmSpec, MlpSpec};
pub use params::{Adam, ParamSet};
pub use tape::{Grads, Tape, ValueId};
pub use tensor::Tensor;
