use autonn::{Tape, Tensor};
use models::{decide, perceive, reason, ActWindow, ModelSet, ObsWindow};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simworld::{ActionCmd, ObsVector, SimParams};

use crate::error::EvalError;

/// How the benchmark drives the robot. Policy runs the trained networks;
/// the other three are baselines and sanity probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Policy,
    Random,
    NeverMove,
    StraightToGoal,
}

impl ControllerKind {
    pub fn parse(name: &str) -> Result<Self, EvalError> {
        match name {
            "policy" => Ok(Self::Policy),
            "random" => Ok(Self::Random),
            "never-move" => Ok(Self::NeverMove),
            "straight" => Ok(Self::StraightToGoal),
            other => Err(EvalError::invalid(format!(
                "unknown controller {other:?}; expected policy, random, never-move, or straight"
            ))),
        }
    }

    pub fn needs_checkpoint(self) -> bool {
        self == Self::Policy
    }
}

// The rng variant is bigger than the rest; one controller exists per
// worker thread so the size gap is irrelevant.
#[allow(clippy::large_enum_variant)]
pub enum Controller<'a> {
    Policy(PolicyController<'a>),
    Random(ChaCha8Rng),
    NeverMove,
    StraightToGoal,
}

impl<'a> Controller<'a> {
    /// `models` must be present iff `kind` is `Policy`.
    pub fn build(kind: ControllerKind, models: Option<&'a ModelSet>) -> Result<Self, EvalError> {
        match kind {
            ControllerKind::Policy => {
                let m = models
                    .ok_or_else(|| EvalError::invalid("policy controller needs a checkpoint"))?;
                Ok(Self::Policy(PolicyController::new(m)))
            }
            ControllerKind::Random => Ok(Self::Random(ChaCha8Rng::seed_from_u64(0))),
            ControllerKind::NeverMove => Ok(Self::NeverMove),
            ControllerKind::StraightToGoal => Ok(Self::StraightToGoal),
        }
    }

    /// Resets per-episode state so identical seeds replay identically.
    pub fn reset(&mut self, seed: u64) {
        match self {
            Self::Policy(p) => p.reset(),
            Self::Random(rng) => *rng = ChaCha8Rng::seed_from_u64(seed),
            Self::NeverMove | Self::StraightToGoal => {}
        }
    }

    pub fn act(&mut self, obs: &ObsVector, sim: &SimParams) -> Result<ActionCmd, EvalError> {
        match self {
            Self::Policy(p) => p.act(obs, sim),
            Self::Random(rng) => Ok(ActionCmd::new(
                rng.random_range(0.0..sim.v_max),
                rng.random_range(-sim.w_max..sim.w_max),
            )),
            Self::NeverMove => Ok(ActionCmd::new(0.0, 0.0)),
            Self::StraightToGoal => Ok(straight_to_goal(obs, sim)),
        }
    }
}

/// Turns toward the goal bearing and drives forward once roughly aligned.
/// Blind to obstacles; only sensible in open scenes.
fn straight_to_goal(obs: &ObsVector, sim: &SimParams) -> ActionCmd {
    let (_, bearing_norm) = obs.goal_rel();
    let bearing = bearing_norm * std::f64::consts::PI;
    let v = (sim.v_max * bearing.cos()).max(0.0);
    let w = (2.0 * bearing).clamp(-sim.w_max, sim.w_max);
    ActionCmd::new(v, w)
}

/// Deterministic policy rollout: actions are the network means, never
/// sampled, so a fixed seed gives byte-identical benchmark output.
pub struct PolicyController<'a> {
    models: &'a ModelSet,
    obs_win: ObsWindow,
    act_win: ActWindow,
}

impl<'a> PolicyController<'a> {
    pub fn new(models: &'a ModelSet) -> Self {
        let cfg = &models.config;
        Self {
            models,
            obs_win: ObsWindow::new(cfg.window, cfg.obs_dim),
            act_win: ActWindow::new(cfg.window, cfg.act_dim),
        }
    }

    pub fn reset(&mut self) {
        self.obs_win.reset();
        self.act_win.reset();
    }

    pub fn act(&mut self, obs: &ObsVector, sim: &SimParams) -> Result<ActionCmd, EvalError> {
        Ok(self.act_inner(obs, sim, false)?.0)
    }

    /// Like [`act`](Self::act) but also returns the reasoning latent mean
    /// for the action window ending at the command just produced.
    pub fn act_with_latent(
        &mut self,
        obs: &ObsVector,
        sim: &SimParams,
    ) -> Result<(ActionCmd, Vec<f64>), EvalError> {
        let (cmd, latent) = self.act_inner(obs, sim, true)?;
        Ok((cmd, latent.expect("latent requested")))
    }

    fn act_inner(
        &mut self,
        obs: &ObsVector,
        sim: &SimParams,
        want_latent: bool,
    ) -> Result<(ActionCmd, Option<Vec<f64>>), EvalError> {
        let cfg = &self.models.config;
        self.obs_win.push(obs.as_slice());

        let mut tape = Tape::new();
        let obs_seq: Vec<Tensor> = (0..cfg.window)
            .map(|t| Tensor::matrix(1, cfg.obs_dim, self.obs_win.row(t).to_vec()))
            .collect::<Result<_, _>>()?;
        let dist = perceive(&mut tape, cfg, &self.models.perception, &obs_seq, 1)?;
        let head = decide(
            &mut tape,
            cfg,
            &self.models.decision,
            dist.mu,
            sim.v_max,
            sim.w_max,
        )?;
        let v = tape.scalar(head.v_mean);
        let w = tape.scalar(head.w_mean);
        let cmd = ActionCmd::new(v, w).clamped(sim.v_max, sim.w_max);

        let latent = if want_latent {
            let pending = [cmd.v, cmd.w];
            let act_seq: Vec<Tensor> = (0..cfg.window)
                .map(|t| Tensor::matrix(1, cfg.act_dim, self.act_win.row_with(t, &pending).to_vec()))
                .collect::<Result<_, _>>()?;
            let r = reason(&mut tape, cfg, &self.models.reasoning, &act_seq, 1)?;
            Some(tape.value(r.mu).to_vec())
        } else {
            None
        };

        self.act_win.push(&[cmd.v, cmd.w]);
        Ok((cmd, latent))
    }
}
