use std::io::Write;

use models::ModelSet;
use scenes::SceneSpec;
use simworld::SimParams;

use crate::benchmark::episode_seed;
use crate::controller::{Controller, ControllerKind};
use crate::episode::run_episode_trace;
use crate::error::EvalError;

pub const HIST_HEADER: &str = "scenario,bin,bin_lo,bin_hi,count";

/// `scenario,episode,t,v,w,z0..z{n-1}`: one row per executed step with the
/// reasoning latent mean of the action window ending at that step.
pub fn latents_header(latent_dim: usize) -> String {
    let mut header = String::from("scenario,episode,t,v,w");
    for i in 0..latent_dim {
        header.push_str(&format!(",z{i}"));
    }
    header
}

/// Replays deterministic policy episodes and writes every step's command
/// and reasoning latent mean. Row order is (scenario, episode, t).
pub fn export_latents(
    models: &ModelSet,
    suite: &[SceneSpec],
    sim: SimParams,
    episodes: usize,
    base_seed: u64,
    out: &mut impl Write,
) -> Result<(), EvalError> {
    if suite.is_empty() {
        return Err(EvalError::invalid("latent export needs at least one scenario"));
    }
    writeln!(out, "{}", latents_header(models.config.latent_dim)).map_err(EvalError::Io)?;
    let mut ctl = Controller::build(ControllerKind::Policy, Some(models))?;
    for (si, spec) in suite.iter().enumerate() {
        for ei in 0..episodes {
            let seed = episode_seed(base_seed, si, ei);
            let (_, rows) = run_episode_trace(spec, sim, ei, seed, &mut ctl, true)?;
            for row in rows {
                let mut line = format!("{},{},{},{:.6},{:.6}", spec.name, ei, row.t, row.v, row.w);
                for z in &row.latent {
                    line.push_str(&format!(",{z:.6}"));
                }
                writeln!(out, "{line}").map_err(EvalError::Io)?;
            }
        }
    }
    Ok(())
}

/// Histogram of executed linear velocities per scenario over uniform bins
/// spanning [0, v_max]. Every executed step lands in exactly one bin.
#[allow(clippy::too_many_arguments)]
pub fn export_action_hist(
    suite: &[SceneSpec],
    kind: ControllerKind,
    models: Option<&ModelSet>,
    sim: SimParams,
    episodes: usize,
    bins: usize,
    base_seed: u64,
    out: &mut impl Write,
) -> Result<(), EvalError> {
    if bins < 2 {
        return Err(EvalError::invalid(format!("need at least 2 bins, got {bins}")));
    }
    if suite.is_empty() {
        return Err(EvalError::invalid("histogram export needs at least one scenario"));
    }
    writeln!(out, "{HIST_HEADER}").map_err(EvalError::Io)?;
    let width = sim.v_max / bins as f64;
    let mut ctl = Controller::build(kind, models)?;
    for (si, spec) in suite.iter().enumerate() {
        let mut counts = vec![0u64; bins];
        for ei in 0..episodes {
            let seed = episode_seed(base_seed, si, ei);
            let (_, rows) = run_episode_trace(spec, sim, ei, seed, &mut ctl, false)?;
            for row in rows {
                // Executed commands are clamped to [0, v_max]; the top
                // edge folds into the last bin.
                let idx = ((row.v / sim.v_max * bins as f64) as usize).min(bins - 1);
                counts[idx] += 1;
            }
        }
        for (b, count) in counts.iter().enumerate() {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{}",
                spec.name,
                b,
                width * b as f64,
                width * (b + 1) as f64,
                count
            )
            .map_err(EvalError::Io)?;
        }
    }
    Ok(())
}
