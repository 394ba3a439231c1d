//! Policy architecture for closed-loop navigation: a perception encoder
//! mapping observation histories to a latent Gaussian, a reasoning encoder
//! mapping action histories to the same space, a decision head producing
//! bounded velocity commands, and a value head for policy optimization.

mod checkpoint;
mod config;
mod error;
mod graphs;
mod set;
mod similarity;
mod windows;

pub use config::ModelConfig;
pub use error::ModelError;
pub use graphs::{
    decide, perceive, policy_entropy, policy_log_prob, reason, sample_latent, value_of,
    LatentDist, PolicyHead, LN_2PI, LOG_STD_MAX, LOG_STD_MIN,
};
pub use set::{ModelSet, LOG_STD_INIT};
pub use similarity::{gaussian_log_density, similarity_reward, LOG_SIMILARITY_FLOOR};
pub use windows::{ActWindow, ObsWindow};
