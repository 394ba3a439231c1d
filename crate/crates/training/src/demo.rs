//! Demonstration pretraining: a prediction channel (observations -> latent
//! -> action) and a reconstruction channel (actions -> latent -> action)
//! sharing one decision network, with divergence and prior regularizers.

use std::io::Write;

use autonn::{Adam, NnError, Tape, Tensor, ValueId};
use demogen::Trajectory;
use models::{decide, perceive, reason, sample_latent, LatentDist, ModelSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use simworld::SimParams;

use crate::config::TrainConfig;
use crate::error::TrainError;
use crate::losses::{kl_to_standard_mean, latent_divergence_mean};
use crate::rollout::ACT_DIM;

/// Samples per demonstration gradient step.
pub const DEMO_BATCH: usize = 64;
/// Held-out action-prediction error is measured on this many fixed pairs.
const HELDOUT_PAIRS: usize = 256;
/// Every tenth trajectory is held out of training for evaluation.
const HELDOUT_STRIDE: usize = 10;
/// Iterations between held-out evaluations.
const EVAL_EVERY: usize = 100;

/// Index-aligned windows and targets sliced out of demonstrations.
pub struct DemoBatch {
    /// `n` frames of `[B, obs_dim]`, oldest first, current observation last.
    pub obs_seq: Vec<Tensor>,
    /// `n` frames of `[B, act_dim]`; the final frame is the target action.
    pub act_seq: Vec<Tensor>,
    pub target_v: Tensor,
    pub target_w: Tensor,
    pub batch: usize,
}

/// Window rows for time `t` of a trajectory: observations repeat the first
/// frame before the episode start, actions are zero before it.
fn windows_for(traj: &Trajectory, t: usize, n: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let obs_rows: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let idx = (t + k).saturating_sub(n - 1);
            traj.steps[idx].obs.iter().map(|&x| x as f64).collect()
        })
        .collect();
    let act_rows: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            if k == n - 1 {
                let a = traj.steps[t].act;
                vec![a[0] as f64, a[1] as f64]
            } else {
                let offset = n - 1 - k;
                if t >= offset {
                    let a = traj.steps[t - offset].act;
                    vec![a[0] as f64, a[1] as f64]
                } else {
                    vec![0.0; ACT_DIM]
                }
            }
        })
        .collect();
    (obs_rows, act_rows)
}

fn batch_from_pairs(
    trajs: &[Trajectory],
    pairs: &[(usize, usize)],
    n: usize,
    obs_dim: usize,
) -> DemoBatch {
    let b = pairs.len();
    let mut obs_flat = vec![Vec::with_capacity(b * obs_dim); n];
    let mut act_flat = vec![Vec::with_capacity(b * ACT_DIM); n];
    let mut tv = Vec::with_capacity(b);
    let mut tw = Vec::with_capacity(b);
    for &(ti, t) in pairs {
        let (obs_rows, act_rows) = windows_for(&trajs[ti], t, n);
        for k in 0..n {
            obs_flat[k].extend_from_slice(&obs_rows[k]);
            act_flat[k].extend_from_slice(&act_rows[k]);
        }
        tv.push(trajs[ti].steps[t].act[0] as f64);
        tw.push(trajs[ti].steps[t].act[1] as f64);
    }
    DemoBatch {
        obs_seq: obs_flat
            .into_iter()
            .map(|f| Tensor::matrix(b, obs_dim, f).expect("aligned rows"))
            .collect(),
        act_seq: act_flat
            .into_iter()
            .map(|f| Tensor::matrix(b, ACT_DIM, f).expect("aligned rows"))
            .collect(),
        target_v: Tensor::matrix(b, 1, tv).expect("aligned rows"),
        target_w: Tensor::matrix(b, 1, tw).expect("aligned rows"),
        batch: b,
    }
}

/// Uniformly samples `batch` (trajectory, step) pairs and assembles windows.
pub fn sample_demo_batch(
    trajs: &[Trajectory],
    n: usize,
    obs_dim: usize,
    batch: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DemoBatch, TrainError> {
    if trajs.is_empty() {
        return Err(TrainError::Dataset { msg: "no trajectories".into() });
    }
    let pairs: Vec<(usize, usize)> = (0..batch)
        .map(|_| {
            let ti = rng.random_range(0..trajs.len());
            let t = rng.random_range(0..trajs[ti].steps.len());
            (ti, t)
        })
        .collect();
    Ok(batch_from_pairs(trajs, &pairs, n, obs_dim))
}

/// Graph nodes for the three demonstration losses; all `[1, 1]`.
pub struct DemoLossGraph {
    pub l1: ValueId,
    pub l2: ValueId,
    pub l3: ValueId,
    pub total: ValueId,
}

/// Loss assembly from already-built distribution and channel outputs:
/// `l1` is the squared action error of both channels summed over action
/// components, `l2` the inter-channel divergence, `l3` the prior pull on
/// both latent distributions; `total` their unweighted sum.
pub fn demo_loss_from_parts(
    tape: &mut Tape,
    p: &LatentDist,
    r: &LatentDist,
    pred: (ValueId, ValueId),
    rec: (ValueId, ValueId),
    target_v: ValueId,
    target_w: ValueId,
) -> Result<DemoLossGraph, NnError> {
    let sq_err = |tape: &mut Tape, out: ValueId, tgt: ValueId| -> Result<ValueId, NnError> {
        let d = tape.sub(out, tgt)?;
        Ok(tape.square(d))
    };
    let pv = sq_err(tape, pred.0, target_v)?;
    let pw = sq_err(tape, pred.1, target_w)?;
    let rv = sq_err(tape, rec.0, target_v)?;
    let rw = sq_err(tape, rec.1, target_w)?;
    let pred_sum = tape.add(pv, pw)?;
    let rec_sum = tape.add(rv, rw)?;
    let l1_rows = tape.add(pred_sum, rec_sum)?;
    let l1 = tape.mean_all(l1_rows);

    let l2 = latent_divergence_mean(tape, p, r)?;

    let kp = kl_to_standard_mean(tape, p)?;
    let kr = kl_to_standard_mean(tape, r)?;
    let l3 = tape.add(kp, kr)?;

    let l12 = tape.add(l1, l2)?;
    let total = tape.add(l12, l3)?;
    Ok(DemoLossGraph { l1, l2, l3, total })
}

/// Builds the full two-channel loss graph for one batch. `eps_p` / `eps_r`
/// are the reparameterization draws, `[B, latent]` each.
pub fn demo_losses(
    tape: &mut Tape,
    models: &ModelSet,
    batch: &DemoBatch,
    sim: &SimParams,
    eps_p: &Tensor,
    eps_r: &Tensor,
) -> Result<DemoLossGraph, TrainError> {
    let mcfg = &models.config;
    let p = perceive(tape, mcfg, &models.perception, &batch.obs_seq, batch.batch)?;
    let r = reason(tape, mcfg, &models.reasoning, &batch.act_seq, batch.batch)?;
    let sp = sample_latent(tape, &p, eps_p)?;
    let sr = sample_latent(tape, &r, eps_r)?;
    let pred = decide(tape, mcfg, &models.decision, sp, sim.v_max, sim.w_max)?;
    let rec = decide(tape, mcfg, &models.decision, sr, sim.v_max, sim.w_max)?;
    let tv = tape.constant(&batch.target_v)?;
    let tw = tape.constant(&batch.target_w)?;
    Ok(demo_loss_from_parts(
        tape,
        &p,
        &r,
        (pred.v_mean, pred.w_mean),
        (rec.v_mean, rec.w_mean),
        tv,
        tw,
    )?)
}

/// Adam state for the three demonstration-trained networks.
pub struct DemoOptim {
    pub perception: Adam,
    pub decision: Adam,
    pub reasoning: Adam,
}

impl DemoOptim {
    pub fn new() -> Self {
        Self {
            perception: Adam::new(0.9, 0.999, 1e-8),
            decision: Adam::new(0.9, 0.999, 1e-8),
            reasoning: Adam::new(0.9, 0.999, 1e-8),
        }
    }
}

impl Default for DemoOptim {
    fn default() -> Self {
        Self::new()
    }
}

/// Reported per-step loss values.
#[derive(Clone, Copy, Debug)]
pub struct DemoLosses {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub total: f64,
}

fn normal_tensor(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::matrix(rows, cols, (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect())
        .expect("requested shape")
}

/// One gradient step on perception, decision, and reasoning jointly.
pub fn demo_step(
    models: &mut ModelSet,
    optim: &mut DemoOptim,
    batch: &DemoBatch,
    cfg: &TrainConfig,
    sim: &SimParams,
    rng: &mut ChaCha8Rng,
) -> Result<DemoLosses, TrainError> {
    let latent = models.config.latent_dim;
    let eps_p = normal_tensor(batch.batch, latent, rng);
    let eps_r = normal_tensor(batch.batch, latent, rng);
    let mut tape = Tape::new();
    let graph = demo_losses(&mut tape, models, batch, sim, &eps_p, &eps_r)?;
    let losses = DemoLosses {
        l1: tape.scalar(graph.l1),
        l2: tape.scalar(graph.l2),
        l3: tape.scalar(graph.l3),
        total: tape.scalar(graph.total),
    };
    if !losses.total.is_finite() {
        return Err(TrainError::NonFinite { what: "demonstration loss", iter: 0 });
    }
    let grads = tape.backward(graph.total)?;
    drop(tape);
    optim.perception.step(&mut models.perception, &grads, cfg.lr_demo)?;
    optim.decision.step(&mut models.decision, &grads, cfg.lr_demo)?;
    optim.reasoning.step(&mut models.reasoning, &grads, cfg.lr_demo)?;
    Ok(losses)
}

/// Mean squared action-prediction error of the deterministic prediction
/// channel (latent mean, no sampling) over fixed (trajectory, step) pairs.
pub fn heldout_action_mse(
    models: &ModelSet,
    trajs: &[Trajectory],
    pairs: &[(usize, usize)],
    sim: &SimParams,
) -> Result<f64, TrainError> {
    assert!(!pairs.is_empty());
    let mcfg = &models.config;
    let mut total = 0.0;
    for chunk in pairs.chunks(DEMO_BATCH) {
        let batch = batch_from_pairs(trajs, chunk, mcfg.window, mcfg.obs_dim);
        let mut tape = Tape::new();
        let p = perceive(&mut tape, mcfg, &models.perception, &batch.obs_seq, batch.batch)?;
        let head = decide(&mut tape, mcfg, &models.decision, p.mu, sim.v_max, sim.w_max)?;
        let v = tape.value(head.v_mean);
        let w = tape.value(head.w_mean);
        for (i, &(ti, t)) in chunk.iter().enumerate() {
            let a = trajs[ti].steps[t].act;
            let dv = v[i] - a[0] as f64;
            let dw = w[i] - a[1] as f64;
            total += dv * dv + dw * dw;
        }
    }
    Ok(total / pairs.len() as f64)
}

/// Summary of a demonstration training run.
#[derive(Clone, Copy, Debug)]
pub struct Stage1Report {
    pub iters: usize,
    pub initial_heldout_mse: f64,
    pub final_heldout_mse: f64,
    pub first_window_total: f64,
    pub last_window_total: f64,
}

/// Trains fresh models on demonstrations for `iters` steps. Writes one CSV
/// row per iteration (`iter,l1,l2,l3,total,heldout_mse`; the last column
/// repeats the most recent measurement). Trajectories at every
/// [`HELDOUT_STRIDE`]-th index are held out for evaluation.
pub fn run_stage1(
    trajs: &[Trajectory],
    cfg: &TrainConfig,
    sim: &SimParams,
    seed: u64,
    iters: usize,
    csv: &mut impl Write,
) -> Result<(ModelSet, Stage1Report), TrainError> {
    let mcfg = cfg.model_config();
    if trajs.is_empty() {
        return Err(TrainError::Dataset { msg: "no trajectories".into() });
    }
    for (i, t) in trajs.iter().enumerate() {
        if t.steps.is_empty() {
            return Err(TrainError::Dataset { msg: format!("trajectory {i} has no steps") });
        }
        if t.steps[0].obs.len() != mcfg.obs_dim {
            return Err(TrainError::Dataset {
                msg: format!(
                    "trajectory {i} has {}-d observations, expected {}",
                    t.steps[0].obs.len(),
                    mcfg.obs_dim
                ),
            });
        }
    }

    let mut train: Vec<Trajectory> = Vec::new();
    let mut held: Vec<Trajectory> = Vec::new();
    for (i, t) in trajs.iter().enumerate() {
        if trajs.len() >= 2 && i % HELDOUT_STRIDE == HELDOUT_STRIDE - 1 {
            held.push(t.clone());
        } else {
            train.push(t.clone());
        }
    }
    if held.is_empty() {
        held.push(train.pop().ok_or(TrainError::Dataset {
            msg: "need at least two trajectories to split off a held-out set".into(),
        })?);
    }
    if train.is_empty() {
        return Err(TrainError::Dataset {
            msg: "need at least two trajectories to split off a held-out set".into(),
        });
    }

    let mut root = ChaCha8Rng::seed_from_u64(seed);
    let init_seed = root.random::<u64>();
    let mut batch_rng = ChaCha8Rng::seed_from_u64(root.random::<u64>());
    let mut eps_rng = ChaCha8Rng::seed_from_u64(root.random::<u64>());
    let mut pair_rng = ChaCha8Rng::seed_from_u64(root.random::<u64>());

    let pairs: Vec<(usize, usize)> = (0..HELDOUT_PAIRS)
        .map(|_| {
            let ti = pair_rng.random_range(0..held.len());
            let t = pair_rng.random_range(0..held[ti].steps.len());
            (ti, t)
        })
        .collect();

    let mut models = ModelSet::init(mcfg.clone(), init_seed);
    let mut optim = DemoOptim::new();
    let initial_mse = heldout_action_mse(&models, &held, &pairs, sim)?;
    let mut last_mse = initial_mse;

    writeln!(csv, "iter,l1,l2,l3,total,heldout_mse")?;
    let window = 100.min(iters.max(1));
    let mut first_totals = Vec::with_capacity(window);
    let mut last_totals = std::collections::VecDeque::with_capacity(window);

    for iter in 0..iters {
        let batch = sample_demo_batch(&train, mcfg.window, mcfg.obs_dim, DEMO_BATCH, &mut batch_rng)?;
        let losses = demo_step(&mut models, &mut optim, &batch, cfg, sim, &mut eps_rng)
            .map_err(|e| match e {
                TrainError::NonFinite { what, .. } => TrainError::NonFinite { what, iter },
                other => other,
            })?;
        if first_totals.len() < window {
            first_totals.push(losses.total);
        }
        if last_totals.len() == window {
            last_totals.pop_front();
        }
        last_totals.push_back(losses.total);
        if (iter + 1) % EVAL_EVERY == 0 || iter + 1 == iters {
            last_mse = heldout_action_mse(&models, &held, &pairs, sim)?;
        }
        writeln!(
            csv,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            iter + 1,
            losses.l1,
            losses.l2,
            losses.l3,
            losses.total,
            last_mse
        )?;
    }

    let final_mse = if iters == 0 { initial_mse } else { last_mse };
    let report = Stage1Report {
        iters,
        initial_heldout_mse: initial_mse,
        final_heldout_mse: final_mse,
        first_window_total: mean(&first_totals),
        last_window_total: mean_deque(&last_totals),
    };
    Ok((models, report))
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn mean_deque(xs: &std::collections::VecDeque<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}
