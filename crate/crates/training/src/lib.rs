//! Two-stage navigation policy training.
//!
//! Stage 1 learns from demonstrations: a prediction channel (observation
//! windows to actions) and a reconstruction channel (action windows to
//! actions) share one decision network and are pulled together in latent
//! space. Stage 2 fine-tunes with PPO on combined navigation-plus-latent-
//! similarity rewards, updating the reasoning model asynchronously with
//! discounted-return-weighted losses.

mod config;
mod demo;
mod drw;
mod error;
mod gae;
mod losses;
mod ppo;
mod returns;
mod rollout;
mod stage2;

pub use config::{parse_config, TrainConfig};
pub use demo::{
    demo_loss_from_parts, demo_losses, demo_step, heldout_action_mse, run_stage1,
    sample_demo_batch, DemoBatch, DemoLossGraph, DemoLosses, DemoOptim, Stage1Report, DEMO_BATCH,
};
pub use drw::{drw_losses, drw_update, eligible_weights, DrwReport, DRW_BATCH_CAP};
pub use error::TrainError;
pub use gae::{compute_gae, gae_episode};
pub use losses::{
    kl_to_standard, kl_to_standard_mean, latent_divergence, latent_divergence_mean,
    standard_reg_mean,
};
pub use ppo::{ppo_update, PpoReport, RlOptim, RATIO_GUARD};
pub use returns::discounted_returns;
pub use rollout::{
    collect_rollout, EnvPool, EpisodeSpan, EpisodeStat, RolloutBuffer, StepSample, ACT_DIM,
};
pub use stage2::{run_stage2, Stage2Options, Stage2Report};
