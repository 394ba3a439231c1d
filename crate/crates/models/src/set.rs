//! The four-network policy bundle and its parameter initialization.

use autonn::{ParamSet, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;

/// Initial per-dimension log standard deviation of the action Gaussian.
pub const LOG_STD_INIT: f64 = -0.5;

#[derive(Clone, Debug)]
pub struct ModelSet {
    pub config: ModelConfig,
    pub perception: ParamSet,
    pub reasoning: ParamSet,
    pub decision: ParamSet,
    pub value: ParamSet,
}

fn merge(dst: &mut ParamSet, src: &ParamSet) {
    for (name, t) in src.iter() {
        dst.insert(name.clone(), t.clone());
    }
}

impl ModelSet {
    /// Fresh parameters. Each network draws from its own seed stream, so
    /// the draws of one never shift the others.
    pub fn init(config: ModelConfig, seed: u64) -> Self {
        let mut root = ChaCha8Rng::seed_from_u64(seed);
        let seeds: [u64; 4] = std::array::from_fn(|_| root.random());

        let mut rng = ChaCha8Rng::seed_from_u64(seeds[0]);
        let mut perception = config.perception_lstm().init("perception", &mut rng);
        merge(&mut perception, &config.perception_head().init("perception", &mut rng));

        let mut rng = ChaCha8Rng::seed_from_u64(seeds[1]);
        let mut reasoning = config.reasoning_lstm().init("reasoning", &mut rng);
        merge(&mut reasoning, &config.reasoning_head().init("reasoning", &mut rng));

        let mut rng = ChaCha8Rng::seed_from_u64(seeds[2]);
        let mut decision = config.decision_mlp().init("decision", &mut rng);
        decision.insert(
            "log_std",
            Tensor::matrix(1, config.act_dim, vec![LOG_STD_INIT; config.act_dim])
                .expect("act_dim values"),
        );

        let mut rng = ChaCha8Rng::seed_from_u64(seeds[3]);
        let value = config.value_mlp().init("value", &mut rng);

        Self {
            config,
            perception,
            reasoning,
            decision,
            value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_produces_expected_shapes() {
        let cfg = ModelConfig::default();
        let m = ModelSet::init(cfg, 1);
        assert_eq!(m.perception.get("w_ih").unwrap().shape(), &[184, 512]);
        assert_eq!(m.perception.get("l1.w").unwrap().shape(), &[128, 180]);
        assert_eq!(m.reasoning.get("w_ih").unwrap().shape(), &[2, 512]);
        assert_eq!(m.decision.get("l0.w").unwrap().shape(), &[90, 128]);
        assert_eq!(m.decision.get("l1.w").unwrap().shape(), &[128, 2]);
        assert_eq!(m.decision.get("log_std").unwrap().data(), &[-0.5, -0.5]);
        assert_eq!(m.value.get("l1.w").unwrap().shape(), &[128, 1]);
    }

    #[test]
    fn init_is_deterministic_and_streams_are_independent() {
        let cfg = ModelConfig::default();
        let a = ModelSet::init(cfg, 42);
        let b = ModelSet::init(cfg, 42);
        assert_eq!(a.perception.get("w_hh").unwrap(), b.perception.get("w_hh").unwrap());
        assert_eq!(a.decision.get("l0.w").unwrap(), b.decision.get("l0.w").unwrap());

        let c = ModelSet::init(cfg, 43);
        assert_ne!(a.perception.get("w_hh").unwrap(), c.perception.get("w_hh").unwrap());
        // Same-shaped heads on different networks must differ.
        assert_ne!(a.perception.get("l1.w").unwrap(), a.reasoning.get("l1.w").unwrap());
    }
}
