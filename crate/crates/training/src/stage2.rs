//! Reinforcement stage: rollout, advantage estimation, policy updates, and
//! periodic reasoning updates, with CSV logging and checkpointing.

use std::collections::VecDeque;
use std::io::Write;
use std::path::PathBuf;

use models::ModelSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scenes::SceneSpec;
use simworld::{Event, SimParams};

use crate::config::TrainConfig;
use crate::drw::drw_update;
use crate::error::TrainError;
use crate::gae::compute_gae;
use crate::ppo::{ppo_update, RlOptim};
use crate::rollout::{collect_rollout, EnvPool, EpisodeStat};

/// Episode statistics are reported over a rolling window of this many
/// recently finished episodes.
const ROLLING_EPISODES: usize = 50;

#[derive(Clone, Debug)]
pub struct Stage2Options {
    pub iters: usize,
    /// Skip the reasoning model entirely: similarity rewards are zero and
    /// reasoning updates never run.
    pub no_reasoning: bool,
    /// Run reasoning updates with every weight fixed to 1.
    pub no_drw: bool,
    /// Save checkpoints every this many iterations (0: only at the end).
    pub checkpoint_every: usize,
    /// Where checkpoints go; none disables saving.
    pub out_dir: Option<PathBuf>,
}

impl Default for Stage2Options {
    fn default() -> Self {
        Self {
            iters: 0,
            no_reasoning: false,
            no_drw: false,
            checkpoint_every: 25,
            out_dir: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Stage2Report {
    pub iters_run: usize,
    /// Iterations on which a reasoning update was due.
    pub drw_invocations: usize,
    /// Reasoning updates that actually ran (a buffer with no finished
    /// episode skips its update).
    pub drw_applied: usize,
    pub guard_trips: usize,
    pub episodes_completed: usize,
    /// Success rate over the final rolling window.
    pub final_success_rate: f64,
    pub final_mean_return: f64,
}

fn window_stats(window: &VecDeque<EpisodeStat>) -> (f64, f64) {
    if window.is_empty() {
        return (0.0, 0.0);
    }
    let n = window.len() as f64;
    let mean_return = window.iter().map(|e| e.combined_return).sum::<f64>() / n;
    let successes = window.iter().filter(|e| e.event == Event::Reached).count() as f64;
    (mean_return, successes / n)
}

/// Trains the policy (and, unless ablated, the reasoning model) in place.
/// Writes one CSV row per iteration; `l_r1`/`l_r2` repeat the most recent
/// reasoning losses. Checkpoints are written under `out_dir`, so an abort
/// mid-run leaves the last saved set on disk.
pub fn run_stage2(
    models: &mut ModelSet,
    cfg: &TrainConfig,
    sim: &SimParams,
    specs: &[SceneSpec],
    seed: u64,
    opts: &Stage2Options,
    csv: &mut impl Write,
) -> Result<Stage2Report, TrainError> {
    cfg.validate()?;
    writeln!(
        csv,
        "iter,env_steps,mean_return,mean_r_sim,success_rate,l_policy,l_value,entropy,l_r1,l_r2"
    )?;

    let mut root = ChaCha8Rng::seed_from_u64(seed);
    let pool_seed = root.random::<u64>();
    let mut act_rng = ChaCha8Rng::seed_from_u64(root.random::<u64>());
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(root.random::<u64>());
    let mut drw_rng = ChaCha8Rng::seed_from_u64(root.random::<u64>());

    let mut pool = EnvPool::new(specs.to_vec(), sim.clone(), cfg.n_envs, cfg.n, pool_seed)?;
    let mut optim = RlOptim::new();
    let mut report = Stage2Report::default();
    let mut window: VecDeque<EpisodeStat> = VecDeque::with_capacity(ROLLING_EPISODES);
    let mut last_drw = (0.0, 0.0);

    for iter in 0..opts.iters {
        let buffer = collect_rollout(&mut pool, models, cfg, &mut act_rng, opts.no_reasoning)?;
        let (advantages, returns) = compute_gae(&buffer, cfg.gamma, cfg.gae_lambda);
        let ppo = ppo_update(
            models,
            &mut optim,
            &buffer,
            &advantages,
            &returns,
            cfg,
            sim,
            &mut shuffle_rng,
        )
        .map_err(|e| at_iter(e, iter))?;
        if ppo.guard_tripped {
            report.guard_trips += 1;
        }

        if !opts.no_reasoning && (iter + 1) % cfg.reasoning_period == 0 {
            report.drw_invocations += 1;
            if let Some(drw) =
                drw_update(models, &mut optim, &buffer, cfg, &mut drw_rng, opts.no_drw)
                    .map_err(|e| at_iter(e, iter))?
            {
                report.drw_applied += 1;
                last_drw = (drw.l_r1, drw.l_r2);
            }
        }

        for ep in pool.drain_completed() {
            if window.len() == ROLLING_EPISODES {
                window.pop_front();
            }
            window.push_back(ep);
            report.episodes_completed += 1;
        }
        let (mean_return, success_rate) = window_stats(&window);
        writeln!(
            csv,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            iter + 1,
            (iter + 1) * cfg.horizon,
            mean_return,
            buffer.mean_r_sim(),
            success_rate,
            ppo.l_policy,
            ppo.l_value,
            ppo.entropy,
            last_drw.0,
            last_drw.1,
        )?;

        if let Some(dir) = &opts.out_dir {
            let due = opts.checkpoint_every > 0 && (iter + 1) % opts.checkpoint_every == 0;
            if due || iter + 1 == opts.iters {
                models.save(dir)?;
            }
        }
        report.iters_run = iter + 1;
    }

    let (mean_return, success_rate) = window_stats(&window);
    report.final_mean_return = mean_return;
    report.final_success_rate = success_rate;
    Ok(report)
}

fn at_iter(e: TrainError, iter: usize) -> TrainError {
    match e {
        TrainError::NonFinite { what, .. } => TrainError::NonFinite { what, iter },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scenes::by_name;

    fn tiny_cfg() -> TrainConfig {
        TrainConfig {
            horizon: 8,
            n_envs: 2,
            minibatch: 8,
            epochs: 1,
            ..TrainConfig::default()
        }
    }

    fn unique_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir()
            .join(format!("stage2-{tag}-{}-{}", std::process::id(), rand::random::<u32>()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn zero_iterations_touch_nothing() {
        let cfg = tiny_cfg();
        let mut models = ModelSet::init(cfg.model_config(), 3);
        let before: Vec<(String, Vec<f64>)> = [
            &models.perception,
            &models.reasoning,
            &models.decision,
            &models.value,
        ]
        .iter()
        .flat_map(|set| set.iter().map(|(n, t)| (n.clone(), t.data().to_vec())))
        .collect();

        let mut csv = Vec::new();
        let opts = Stage2Options { iters: 0, ..Stage2Options::default() };
        let report = run_stage2(
            &mut models,
            &cfg,
            &SimParams::default(),
            &[by_name("train_open").unwrap()],
            1,
            &opts,
            &mut csv,
        )
        .unwrap();
        assert_eq!(report.iters_run, 0);
        let after: Vec<(String, Vec<f64>)> = [
            &models.perception,
            &models.reasoning,
            &models.decision,
            &models.value,
        ]
        .iter()
        .flat_map(|set| set.iter().map(|(n, t)| (n.clone(), t.data().to_vec())))
        .collect();
        assert_eq!(before, after);
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("iter,env_steps,mean_return,mean_r_sim,success_rate"));
    }

    #[test]
    fn reasoning_updates_fire_on_the_stated_period() {
        let cfg = tiny_cfg();
        let mut models = ModelSet::init(cfg.model_config(), 5);
        let mut csv = Vec::new();
        let opts = Stage2Options { iters: 25, checkpoint_every: 0, ..Stage2Options::default() };
        // Episodes of at most 4 steps: every 4-step rollout then contains a
        // terminal, so each due reasoning update finds usable episodes.
        let sim = SimParams { max_steps: 4, ..SimParams::default() };
        let report = run_stage2(
            &mut models,
            &cfg,
            &sim,
            &[by_name("train_open").unwrap()],
            2,
            &opts,
            &mut csv,
        )
        .unwrap();
        assert_eq!(report.iters_run, 25);
        assert_eq!(report.drw_invocations, 2);
        assert_eq!(report.drw_applied, 2);
        assert!(report.episodes_completed > 0);

        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 26);
        for row in &lines[1..] {
            assert_eq!(row.split(',').count(), 10);
        }
        // env_steps accumulates by the horizon.
        let last: Vec<&str> = lines[25].split(',').collect();
        assert_eq!(last[0], "25");
        assert_eq!(last[1], "200");
    }

    #[test]
    fn ablated_reasoning_never_updates_and_still_trains() {
        let cfg = tiny_cfg();
        let mut models = ModelSet::init(cfg.model_config(), 7);
        let reasoning_before: Vec<f64> =
            models.reasoning.get("w_ih").unwrap().data().to_vec();
        let mut csv = Vec::new();
        let opts = Stage2Options {
            iters: 12,
            no_reasoning: true,
            checkpoint_every: 0,
            ..Stage2Options::default()
        };
        let sim = SimParams { max_steps: 6, ..SimParams::default() };
        let report = run_stage2(
            &mut models,
            &cfg,
            &sim,
            &[by_name("train_open").unwrap()],
            3,
            &opts,
            &mut csv,
        )
        .unwrap();
        assert_eq!(report.drw_invocations, 0);
        assert_eq!(models.reasoning.get("w_ih").unwrap().data().to_vec(), reasoning_before);
        // mean_r_sim column is zero throughout.
        let text = String::from_utf8(csv).unwrap();
        for row in text.lines().skip(1) {
            let cols: Vec<&str> = row.split(',').collect();
            assert_eq!(cols[3], "0.000000");
        }
    }

    #[test]
    fn checkpoints_land_in_the_output_directory() {
        let cfg = tiny_cfg();
        let mut models = ModelSet::init(cfg.model_config(), 9);
        let dir = unique_dir("ckpt");
        let mut csv = Vec::new();
        let opts = Stage2Options {
            iters: 2,
            checkpoint_every: 1,
            out_dir: Some(dir.clone()),
            ..Stage2Options::default()
        };
        run_stage2(
            &mut models,
            &cfg,
            &SimParams::default(),
            &[by_name("train_open").unwrap()],
            4,
            &opts,
            &mut csv,
        )
        .unwrap();
        for file in ["perception.nlnn", "reasoning.nlnn", "decision.nlnn", "value.nlnn"] {
            assert!(dir.join(file).is_file(), "missing {file}");
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
