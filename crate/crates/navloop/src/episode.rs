use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scenes::{apply_obs_noise, build_scene, SceneSpec};
use simworld::{Event, SimParams};

use crate::controller::Controller;
use crate::error::EvalError;

/// Keeps the observation-noise stream independent of the world-layout
/// stream that consumes the episode seed directly.
const NOISE_SALT: u64 = 0x6f62_735f_6e6f_6973;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Success => "success",
            Self::Collision => "collision",
            Self::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub scenario: String,
    pub episode: usize,
    pub seed: u64,
    pub outcome: Outcome,
    /// Simulator step on which the goal was reached; only for successes.
    pub arriving_step: Option<u32>,
    /// Meters actually driven, summed over per-step position deltas.
    pub path_len: f64,
}

/// One per-step record for the export commands. `t` counts from zero and
/// `v`/`w` are the executed (clamped) commands.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub t: u32,
    pub v: f64,
    pub w: f64,
    pub latent: Vec<f64>,
}

pub fn run_episode(
    spec: &SceneSpec,
    sim: SimParams,
    episode: usize,
    seed: u64,
    controller: &mut Controller,
) -> Result<EpisodeResult, EvalError> {
    let (result, _) = episode_loop(spec, sim, episode, seed, controller, Trace::Off)?;
    Ok(result)
}

/// Runs one episode and records per-step commands; latents are captured
/// only when `with_latent` is set (policy controller only).
pub fn run_episode_trace(
    spec: &SceneSpec,
    sim: SimParams,
    episode: usize,
    seed: u64,
    controller: &mut Controller,
    with_latent: bool,
) -> Result<(EpisodeResult, Vec<TraceRow>), EvalError> {
    let mode = if with_latent { Trace::WithLatent } else { Trace::Commands };
    episode_loop(spec, sim, episode, seed, controller, mode)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Trace {
    Off,
    Commands,
    WithLatent,
}

fn episode_loop(
    spec: &SceneSpec,
    sim: SimParams,
    episode: usize,
    seed: u64,
    controller: &mut Controller,
    trace: Trace,
) -> Result<(EpisodeResult, Vec<TraceRow>), EvalError> {
    let mut world = build_scene(spec, sim, seed)?;
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed ^ NOISE_SALT);
    controller.reset(seed);

    let mut rows = Vec::new();
    let mut path_len = 0.0;
    let outcome = loop {
        let obs = apply_obs_noise(&world.observe(), spec.obs_noise_std, &mut noise_rng);
        let t = world.steps();
        let cmd = match (&mut *controller, trace) {
            (Controller::Policy(p), Trace::WithLatent) => {
                let (cmd, latent) = p.act_with_latent(&obs, &sim)?;
                rows.push(TraceRow { t, v: cmd.v, w: cmd.w, latent });
                cmd
            }
            (c, _) => {
                let cmd = c.act(&obs, &sim)?.clamped(sim.v_max, sim.w_max);
                if trace != Trace::Off {
                    rows.push(TraceRow { t, v: cmd.v, w: cmd.w, latent: Vec::new() });
                }
                cmd
            }
        };
        let before = world.robot_pose().position();
        let step = world.step_episode(cmd)?;
        path_len += world.robot_pose().position().dist(before);
        match step.event {
            Event::Alive => {}
            Event::Reached => break Outcome::Success,
            Event::Collided => break Outcome::Collision,
            Event::Timeout => break Outcome::Timeout,
        }
    };

    let arriving_step = (outcome == Outcome::Success).then(|| world.steps());
    Ok((
        EpisodeResult {
            scenario: spec.name.clone(),
            episode,
            seed,
            outcome,
            arriving_step,
            path_len,
        },
        rows,
    ))
}
