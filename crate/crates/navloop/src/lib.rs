//! Closed-loop navigation benchmark harness: runs trained policies (and
//! baseline controllers) through simulated scenarios, aggregates outcome
//! statistics, and exports per-step diagnostics.

mod benchmark;
mod controller;
mod episode;
mod error;
mod exports;
mod manifest;
mod setup;
mod threads;

pub use benchmark::{
    episode_seed, run_benchmark, write_episodes_csv, write_metrics_csv, BenchmarkReport,
    ScenarioReport, EPISODES_HEADER, METRICS_HEADER,
};
pub use controller::{Controller, ControllerKind, PolicyController};
pub use episode::{run_episode, run_episode_trace, EpisodeResult, Outcome, TraceRow};
pub use error::EvalError;
pub use exports::{export_action_hist, export_latents, latents_header, HIST_HEADER};
pub use manifest::{config_digest, write_manifest};
pub use setup::{load_models, parse_suite, CHECKPOINT_FILES};
pub use threads::worker_count;
