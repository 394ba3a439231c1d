use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use models::ModelSet;
use scenes::SceneSpec;
use simworld::SimParams;

use crate::controller::{Controller, ControllerKind};
use crate::episode::{run_episode, EpisodeResult, Outcome};
use crate::error::EvalError;

pub const METRICS_HEADER: &str =
    "scenario,episodes,success_rate,arriving_step_mean,collision_rate,timeout_rate";
pub const EPISODES_HEADER: &str = "scenario,episode,seed,outcome,arriving_step,path_len";

/// Episode seed for scenario index `si`, episode index `ei`. Each scenario
/// owns a disjoint stream so suites can be evaluated per scenario without
/// changing any episode.
pub fn episode_seed(base_seed: u64, si: usize, ei: usize) -> u64 {
    base_seed.wrapping_add((si as u64) << 32).wrapping_add(ei as u64)
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub scenario: String,
    pub episodes: usize,
    /// Percentages in [0, 100]; the three rates sum to 100.
    pub success_rate: f64,
    /// Mean step count over successful episodes; NaN when none succeeded.
    pub arriving_step_mean: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub scenarios: Vec<ScenarioReport>,
    /// Same statistics pooled over every episode in the suite.
    pub overall: ScenarioReport,
}

fn aggregate(scenario: &str, results: &[&EpisodeResult]) -> ScenarioReport {
    let n = results.len();
    let count = |o: Outcome| results.iter().filter(|r| r.outcome == o).count();
    let successes = count(Outcome::Success);
    let arriving: Vec<f64> = results
        .iter()
        .filter_map(|r| r.arriving_step.map(f64::from))
        .collect();
    let arriving_step_mean = if arriving.is_empty() {
        f64::NAN
    } else {
        arriving.iter().sum::<f64>() / arriving.len() as f64
    };
    let rate = |k: usize| 100.0 * k as f64 / n.max(1) as f64;
    ScenarioReport {
        scenario: scenario.to_string(),
        episodes: n,
        success_rate: rate(successes),
        arriving_step_mean,
        collision_rate: rate(count(Outcome::Collision)),
        timeout_rate: rate(count(Outcome::Timeout)),
    }
}

/// Runs `episodes` episodes of every scenario in `suite` and aggregates
/// outcome statistics. Episodes are distributed over `threads` workers;
/// results are assembled in (scenario, episode) order, so the output is
/// identical for any worker count.
pub fn run_benchmark(
    suite: &[SceneSpec],
    kind: ControllerKind,
    models: Option<&ModelSet>,
    sim: SimParams,
    episodes: usize,
    base_seed: u64,
    threads: usize,
) -> Result<(BenchmarkReport, Vec<EpisodeResult>), EvalError> {
    if suite.is_empty() {
        return Err(EvalError::invalid("benchmark suite is empty"));
    }
    if episodes == 0 {
        return Err(EvalError::invalid("need at least one episode per scenario"));
    }
    if kind.needs_checkpoint() && models.is_none() {
        return Err(EvalError::invalid("policy benchmark needs loaded models"));
    }

    let tasks: Vec<(usize, usize)> = (0..suite.len())
        .flat_map(|si| (0..episodes).map(move |ei| (si, ei)))
        .collect();
    let workers = threads.clamp(1, tasks.len());

    let next = AtomicUsize::new(0);
    let mut collected: Vec<(usize, EpisodeResult)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let next = &next;
                let tasks = &tasks;
                scope.spawn(move || -> Result<Vec<(usize, EpisodeResult)>, EvalError> {
                    let mut ctl = Controller::build(kind, models)?;
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= tasks.len() {
                            return Ok(done);
                        }
                        let (si, ei) = tasks[i];
                        let seed = episode_seed(base_seed, si, ei);
                        let r = run_episode(&suite[si], sim, ei, seed, &mut ctl)?;
                        done.push((i, r));
                    }
                })
            })
            .collect();
        let mut all = Vec::with_capacity(tasks.len());
        let mut first_err = None;
        for h in handles {
            match h.join().expect("episode worker panicked") {
                Ok(part) => all.extend(part),
                Err(e) => first_err = first_err.or(Some(e)),
            }
        }
        match first_err {
            Some(e) => Err(e),
            None => Ok(all),
        }
    })?;

    collected.sort_by_key(|(i, _)| *i);
    let results: Vec<EpisodeResult> = collected.into_iter().map(|(_, r)| r).collect();

    let mut scenarios = Vec::with_capacity(suite.len());
    for (si, spec) in suite.iter().enumerate() {
        let slice: Vec<&EpisodeResult> =
            results[si * episodes..(si + 1) * episodes].iter().collect();
        scenarios.push(aggregate(&spec.name, &slice));
    }
    let all: Vec<&EpisodeResult> = results.iter().collect();
    let overall = aggregate("overall", &all);
    Ok((BenchmarkReport { scenarios, overall }, results))
}

pub fn write_metrics_csv(report: &BenchmarkReport, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for row in report.scenarios.iter().chain(std::iter::once(&report.overall)) {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            row.scenario,
            row.episodes,
            row.success_rate,
            row.arriving_step_mean,
            row.collision_rate,
            row.timeout_rate
        )?;
    }
    Ok(())
}

pub fn write_episodes_csv(results: &[EpisodeResult], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{EPISODES_HEADER}")?;
    for r in results {
        let arriving = r.arriving_step.map(|s| s.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{:.6}",
            r.scenario,
            r.episode,
            r.seed,
            r.outcome.as_str(),
            arriving,
            r.path_len
        )?;
    }
    Ok(())
}
