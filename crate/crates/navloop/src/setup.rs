use std::path::Path;

use models::{ModelConfig, ModelSet};
use scenes::{by_name, demo_scenes, few_shot_scenes, training_scenes, zero_shot_scenes, SceneSpec};

use crate::error::EvalError;

/// Files of a saved network bundle; checked for existence up front so a
/// bad path fails before any episode or training step runs.
pub const CHECKPOINT_FILES: [&str; 4] =
    ["perception.nlnn", "reasoning.nlnn", "decision.nlnn", "value.nlnn"];

pub fn load_models(dir: &Path, config: ModelConfig) -> Result<ModelSet, EvalError> {
    for file in CHECKPOINT_FILES {
        let path = dir.join(file);
        if !path.is_file() {
            return Err(EvalError::MissingCheckpoint { path });
        }
    }
    Ok(ModelSet::load(dir, config)?)
}

/// Named suite (`demo`, `training`, `few-shot`, `zero-shot`) or a
/// comma-separated list of scene names.
pub fn parse_suite(arg: &str) -> Result<Vec<SceneSpec>, EvalError> {
    match arg {
        "demo" => Ok(demo_scenes()),
        "training" => Ok(training_scenes()),
        "few-shot" => Ok(few_shot_scenes()),
        "zero-shot" => Ok(zero_shot_scenes()),
        list => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| by_name(name).map_err(EvalError::Scene))
            .collect::<Result<Vec<_>, _>>()
            .and_then(|specs| {
                if specs.is_empty() {
                    Err(EvalError::invalid("suite resolves to no scenes"))
                } else {
                    Ok(specs)
                }
            }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_suites_resolve() {
        for (name, min) in [("demo", 2), ("training", 2), ("few-shot", 2), ("zero-shot", 2)] {
            let suite = parse_suite(name).unwrap();
            assert!(suite.len() >= min, "{name}: {}", suite.len());
        }
    }

    #[test]
    fn comma_lists_resolve_in_order() {
        let suite = parse_suite("train_sparse, train_open").unwrap();
        assert_eq!(suite[0].name, "train_sparse");
        assert_eq!(suite[1].name, "train_open");
    }

    #[test]
    fn unknown_scene_is_an_error() {
        assert!(parse_suite("no_such_scene").is_err());
        assert!(parse_suite(" , ").is_err());
    }

    #[test]
    fn missing_checkpoint_names_the_file() {
        let err = load_models(Path::new("/nonexistent_dir"), ModelConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("perception.nlnn"), "{msg}");
        assert!(msg.contains("checkpoint file not found"), "{msg}");
    }

    #[test]
    fn roundtrips_a_saved_bundle() {
        let cfg = ModelConfig {
            latent_dim: 4,
            lstm_hidden: 8,
            mlp_hidden: 8,
            window: 3,
            ..ModelConfig::default()
        };
        let dir = std::env::temp_dir().join(format!("navloop_ckpt_{}", std::process::id()));
        ModelSet::init(cfg, 1).save(&dir).unwrap();
        let loaded = load_models(&dir, cfg).unwrap();
        assert_eq!(loaded.config.latent_dim, 4);
        std::fs::remove_dir_all(&dir).ok();
    }
}
