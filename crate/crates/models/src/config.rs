//! Architecture dimensions shared by every network in the policy.

use autonn::{LstmSpec, MlpSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    /// Observation vector length fed to the perception encoder.
    pub obs_dim: usize,
    /// Action vector length fed to the reasoning encoder.
    pub act_dim: usize,
    /// Latent state dimension linking the networks.
    pub latent_dim: usize,
    pub lstm_hidden: usize,
    pub mlp_hidden: usize,
    /// History length of the observation and action windows.
    pub window: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            obs_dim: 184,
            act_dim: 2,
            latent_dim: 90,
            lstm_hidden: 128,
            mlp_hidden: 128,
            window: 20,
        }
    }
}

impl ModelConfig {
    /// Perception: observation window -> latent Gaussian.
    pub fn perception_lstm(&self) -> LstmSpec {
        LstmSpec::new(self.obs_dim, self.lstm_hidden)
    }

    pub fn perception_head(&self) -> MlpSpec {
        MlpSpec::new(
            self.lstm_hidden,
            vec![self.mlp_hidden],
            2 * self.latent_dim,
        )
    }

    /// Reasoning: action window -> latent Gaussian over the same space.
    pub fn reasoning_lstm(&self) -> LstmSpec {
        LstmSpec::new(self.act_dim, self.lstm_hidden)
    }

    pub fn reasoning_head(&self) -> MlpSpec {
        MlpSpec::new(
            self.lstm_hidden,
            vec![self.mlp_hidden],
            2 * self.latent_dim,
        )
    }

    /// Decision: latent -> (v, w) action means.
    pub fn decision_mlp(&self) -> MlpSpec {
        MlpSpec::new(self.latent_dim, vec![self.mlp_hidden], self.act_dim)
    }

    /// Value: latent -> scalar state value.
    pub fn value_mlp(&self) -> MlpSpec {
        MlpSpec::new(self.latent_dim, vec![self.mlp_hidden], 1)
    }
}
