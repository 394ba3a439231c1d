//! Saving and loading the full model bundle as one checkpoint directory.

use std::path::Path;

use autonn::{load_params, save_params, LstmSpec, MlpSpec, ParamSet};

use crate::config::ModelConfig;
use crate::error::ModelError;
use crate::set::ModelSet;

const FILES: [&str; 4] = [
    "perception.nlnn",
    "reasoning.nlnn",
    "decision.nlnn",
    "value.nlnn",
];

fn expected_shapes(
    lstm: Option<LstmSpec>,
    mlp: MlpSpec,
    extra: &[(&str, Vec<usize>)],
) -> Vec<(String, Vec<usize>)> {
    let mut out = Vec::new();
    if let Some(l) = lstm {
        out.push(("w_ih".to_string(), vec![l.input, 4 * l.hidden]));
        out.push(("w_hh".to_string(), vec![l.hidden, 4 * l.hidden]));
        out.push(("b".to_string(), vec![1, 4 * l.hidden]));
    }
    let mut prev = mlp.input;
    for (i, &h) in mlp.hidden.iter().enumerate() {
        out.push((format!("l{i}.w"), vec![prev, h]));
        out.push((format!("l{i}.b"), vec![1, h]));
        prev = h;
    }
    let last = mlp.hidden.len();
    out.push((format!("l{last}.w"), vec![prev, mlp.output]));
    out.push((format!("l{last}.b"), vec![1, mlp.output]));
    for (name, shape) in extra {
        out.push((name.to_string(), shape.clone()));
    }
    out
}

fn check_against(
    params: &ParamSet,
    expected: &[(String, Vec<usize>)],
    file: &str,
) -> Result<(), ModelError> {
    for (name, shape) in expected {
        let t = params.get(name).map_err(|_| ModelError::BadCheckpoint {
            file: file.to_string(),
            msg: format!("missing parameter \"{name}\""),
        })?;
        if t.shape() != shape.as_slice() {
            return Err(ModelError::BadCheckpoint {
                file: file.to_string(),
                msg: format!(
                    "parameter \"{name}\" has shape {:?}, expected {shape:?}",
                    t.shape()
                ),
            });
        }
    }
    if params.len() != expected.len() {
        return Err(ModelError::BadCheckpoint {
            file: file.to_string(),
            msg: format!(
                "contains {} parameters, expected {}",
                params.len(),
                expected.len()
            ),
        });
    }
    Ok(())
}

impl ModelSet {
    /// Writes the four networks into `dir` (created if needed).
    pub fn save(&self, dir: &Path) -> Result<(), ModelError> {
        std::fs::create_dir_all(dir).map_err(autonn::NnError::Io)?;
        for (file, params) in FILES.iter().zip([
            &self.perception,
            &self.reasoning,
            &self.decision,
            &self.value,
        ]) {
            save_params(&dir.join(file), params)?;
        }
        Ok(())
    }

    /// Loads a bundle saved by [`ModelSet::save`] and verifies that every
    /// parameter matches the architecture implied by `config`.
    pub fn load(dir: &Path, config: ModelConfig) -> Result<Self, ModelError> {
        let load = |file: &str, label: &str| -> Result<ParamSet, ModelError> {
            Ok(load_params(&dir.join(file), label)?)
        };
        let perception = load(FILES[0], "perception")?;
        let reasoning = load(FILES[1], "reasoning")?;
        let decision = load(FILES[2], "decision")?;
        let value = load(FILES[3], "value")?;

        check_against(
            &perception,
            &expected_shapes(Some(config.perception_lstm()), config.perception_head(), &[]),
            FILES[0],
        )?;
        check_against(
            &reasoning,
            &expected_shapes(Some(config.reasoning_lstm()), config.reasoning_head(), &[]),
            FILES[1],
        )?;
        check_against(
            &decision,
            &expected_shapes(
                None,
                config.decision_mlp(),
                &[("log_std", vec![1, config.act_dim])],
            ),
            FILES[2],
        )?;
        check_against(
            &value,
            &expected_shapes(None, config.value_mlp(), &[]),
            FILES[3],
        )?;

        Ok(Self {
            config,
            perception,
            reasoning,
            decision,
            value,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use autonn::Tensor;

    fn tmp(name: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("models_ckpt_{}_{name}", std::process::id()))
    }

    fn small_cfg() -> ModelConfig {
        ModelConfig {
            obs_dim: 6,
            act_dim: 2,
            latent_dim: 4,
            lstm_hidden: 5,
            mlp_hidden: 7,
            window: 3,
        }
    }

    #[test]
    fn bundle_round_trips_bit_exactly() {
        let cfg = small_cfg();
        let m = ModelSet::init(cfg, 21);
        let dir = tmp("roundtrip");
        m.save(&dir).unwrap();
        let loaded = ModelSet::load(&dir, cfg).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        for (a, b) in [
            (&m.perception, &loaded.perception),
            (&m.reasoning, &loaded.reasoning),
            (&m.decision, &loaded.decision),
            (&m.value, &loaded.value),
        ] {
            assert_eq!(a.len(), b.len());
            for (name, t) in a.iter() {
                assert_eq!(t, b.get(name).unwrap(), "param {name}");
            }
        }
    }

    #[test]
    fn wrong_architecture_is_rejected() {
        let cfg = small_cfg();
        let m = ModelSet::init(cfg, 22);
        let dir = tmp("mismatch");
        m.save(&dir).unwrap();
        let bigger = ModelConfig {
            latent_dim: 8,
            ..cfg
        };
        let err = ModelSet::load(&dir, bigger).unwrap_err();
        std::fs::remove_dir_all(&dir).ok();
        assert!(matches!(err, ModelError::BadCheckpoint { .. }), "{err}");
    }

    #[test]
    fn extra_parameters_are_rejected() {
        let cfg = small_cfg();
        let mut m = ModelSet::init(cfg, 23);
        m.value.insert("stowaway", Tensor::row(vec![1.0]));
        let dir = tmp("extra");
        m.save(&dir).unwrap();
        let err = ModelSet::load(&dir, cfg).unwrap_err();
        std::fs::remove_dir_all(&dir).ok();
        match err {
            ModelError::BadCheckpoint { file, .. } => assert_eq!(file, "value.nlnn"),
            other => panic!("expected checkpoint error, got {other:?}"),
        }
    }

    #[test]
    fn missing_files_surface_as_errors() {
        let dir = tmp("absent");
        std::fs::create_dir_all(&dir).unwrap();
        let err = ModelSet::load(&dir, small_cfg()).unwrap_err();
        std::fs::remove_dir_all(&dir).ok();
        assert!(matches!(err, ModelError::Nn(_)));
    }
}
