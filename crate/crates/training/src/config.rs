use models::ModelConfig;
use serde::{Deserialize, Serialize};

use crate::error::TrainError;

/// Hyperparameters for both stages. JSON config files mirror these field
/// names exactly; absent fields take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Policy-loss weight in the PPO objective.
    pub alpha: f64,
    /// Value-loss weight in the PPO objective.
    pub beta: f64,
    /// Entropy-bonus weight in the PPO objective.
    pub eta: f64,
    /// Regularizer weight inside the reasoning (DRW) loss.
    pub lambda: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Window length for observation and action sequences.
    pub n: usize,
    /// Latent dimensionality shared by all three encoders.
    pub latent_dim: usize,
    /// Adam learning rate for demonstration pretraining.
    pub lr_demo: f64,
    /// Adam learning rate for PPO and reasoning updates.
    pub lr_rl: f64,
    /// Reasoning model updates once every this many PPO updates.
    pub reasoning_period: usize,
    /// PPO clipped-surrogate range.
    pub clip_eps: f64,
    /// Generalized advantage estimation smoothing.
    pub gae_lambda: f64,
    /// Environment steps collected per PPO update, across all envs.
    pub horizon: usize,
    /// Parallel environments in the rollout pool.
    pub n_envs: usize,
    /// Optimization epochs per PPO update.
    pub epochs: usize,
    /// Minibatch size within each epoch.
    pub minibatch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 20.0,
            eta: 5e-4,
            lambda: 0.01,
            gamma: 0.99,
            n: 20,
            latent_dim: 90,
            lr_demo: 1e-3,
            lr_rl: 3e-5,
            reasoning_period: 10,
            clip_eps: 0.2,
            gae_lambda: 0.95,
            horizon: 2048,
            n_envs: 8,
            epochs: 4,
            minibatch: 256,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let positive_f = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("lr_demo", self.lr_demo),
            ("lr_rl", self.lr_rl),
            ("clip_eps", self.clip_eps),
            ("gae_lambda", self.gae_lambda),
        ];
        for (name, v) in positive_f {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TrainError::Config { msg: format!("{name} must be positive, got {v}") });
            }
        }
        let positive_u = [
            ("n", self.n),
            ("latent_dim", self.latent_dim),
            ("reasoning_period", self.reasoning_period),
            ("horizon", self.horizon),
            ("n_envs", self.n_envs),
            ("epochs", self.epochs),
            ("minibatch", self.minibatch),
        ];
        for (name, v) in positive_u {
            if v == 0 {
                return Err(TrainError::Config { msg: format!("{name} must be at least 1") });
            }
        }
        if self.gamma > 1.0 || self.gae_lambda > 1.0 {
            return Err(TrainError::Config {
                msg: format!(
                    "gamma ({}) and gae_lambda ({}) must not exceed 1",
                    self.gamma, self.gae_lambda
                ),
            });
        }
        if self.n < 2 {
            return Err(TrainError::Config { msg: format!("n must be at least 2, got {}", self.n) });
        }
        if self.horizon % self.n_envs != 0 {
            return Err(TrainError::Config {
                msg: format!(
                    "horizon ({}) must be divisible by n_envs ({})",
                    self.horizon, self.n_envs
                ),
            });
        }
        if self.minibatch > self.horizon {
            return Err(TrainError::Config {
                msg: format!(
                    "minibatch ({}) must not exceed horizon ({})",
                    self.minibatch, self.horizon
                ),
            });
        }
        Ok(())
    }

    /// Network layout induced by this config; hidden sizes are fixed.
    pub fn model_config(&self) -> ModelConfig {
        ModelConfig { latent_dim: self.latent_dim, window: self.n, ..ModelConfig::default() }
    }
}

/// Parses and validates a JSON config document.
pub fn parse_config(text: &str) -> Result<TrainConfig, TrainError> {
    let cfg: TrainConfig = serde_json::from_str(text).map_err(|e| TrainError::ConfigParse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}
