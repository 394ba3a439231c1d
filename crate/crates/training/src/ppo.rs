//! Clipped-surrogate policy optimization over collected rollouts.

use autonn::{Adam, NnError, Tape, Tensor, ValueId};
use models::{decide, perceive, policy_entropy, policy_log_prob, value_of, ModelSet};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use simworld::SimParams;

use crate::config::TrainConfig;
use crate::error::TrainError;
use crate::rollout::RolloutBuffer;

/// An update whose probability ratios drift this far from 1 is aborted.
pub const RATIO_GUARD: f64 = 10.0;

/// Adam state for the reinforcement stage. The reasoning optimizer lives
/// here too so both update kinds share one bundle.
pub struct RlOptim {
    pub perception: Adam,
    pub decision: Adam,
    pub value: Adam,
    pub reasoning: Adam,
}

impl RlOptim {
    pub fn new() -> Self {
        Self {
            perception: Adam::new(0.9, 0.999, 1e-8),
            decision: Adam::new(0.9, 0.999, 1e-8),
            value: Adam::new(0.9, 0.999, 1e-8),
            reasoning: Adam::new(0.9, 0.999, 1e-8),
        }
    }
}

impl Default for RlOptim {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PpoReport {
    /// Minibatch-averaged loss parts.
    pub l_policy: f64,
    pub l_value: f64,
    pub entropy: f64,
    /// `alpha * l_policy + beta * l_value - eta * entropy`, recomputed from
    /// the averaged parts.
    pub total: f64,
    pub minibatches: usize,
    pub guard_tripped: bool,
    pub max_ratio_dev: f64,
}

/// Clipped PPO surrogate: `-mean(min(ratio * adv, clip(ratio) * adv))`.
/// Returns the loss and the ratio node for diagnostics.
pub(crate) fn surrogate_loss(
    tape: &mut Tape,
    new_lp: ValueId,
    old_lp: ValueId,
    adv: ValueId,
    clip_eps: f64,
) -> Result<(ValueId, ValueId), NnError> {
    let diff = tape.sub(new_lp, old_lp)?;
    let ratio = tape.exp(diff);
    let surr1 = tape.mul(ratio, adv)?;
    let clipped = tape.clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
    let surr2 = tape.mul(clipped, adv)?;
    let worst = tape.minimum(surr1, surr2)?;
    let mean = tape.mean_all(worst);
    Ok((tape.neg(mean), ratio))
}

fn column(values: &[f64]) -> Tensor {
    Tensor::matrix(values.len(), 1, values.to_vec()).expect("column shape")
}

/// Several epochs of minibatch updates on perception, decision, and value
/// parameters jointly. Skips the rest of the update (with a warning) if the
/// mean ratio deviation from 1 exceeds [`RATIO_GUARD`].
pub fn ppo_update(
    models: &mut ModelSet,
    optim: &mut RlOptim,
    buffer: &RolloutBuffer,
    advantages: &[f64],
    returns: &[f64],
    cfg: &TrainConfig,
    sim: &SimParams,
    rng: &mut ChaCha8Rng,
) -> Result<PpoReport, TrainError> {
    assert_eq!(buffer.steps.len(), advantages.len());
    assert_eq!(buffer.steps.len(), returns.len());
    let mcfg = models.config.clone();
    let mut report = PpoReport {
        l_policy: 0.0,
        l_value: 0.0,
        entropy: 0.0,
        total: 0.0,
        minibatches: 0,
        guard_tripped: false,
        max_ratio_dev: 0.0,
    };
    let mut indices: Vec<usize> = (0..buffer.steps.len()).collect();

    'epochs: for _ in 0..cfg.epochs {
        indices.shuffle(rng);
        for chunk in indices.chunks(cfg.minibatch) {
            let b = chunk.len();
            let obs_seq: Vec<Tensor> = (0..mcfg.window)
                .map(|k| {
                    let flat: Vec<f64> = chunk
                        .iter()
                        .flat_map(|&i| buffer.steps[i].obs_rows[k].iter().copied())
                        .collect();
                    Tensor::matrix(b, mcfg.obs_dim, flat).expect("window rows are rectangular")
                })
                .collect();
            let v_act: Vec<f64> = chunk.iter().map(|&i| buffer.steps[i].action[0]).collect();
            let w_act: Vec<f64> = chunk.iter().map(|&i| buffer.steps[i].action[1]).collect();
            let old_lp: Vec<f64> = chunk.iter().map(|&i| buffer.steps[i].log_prob).collect();
            let adv: Vec<f64> = chunk.iter().map(|&i| advantages[i]).collect();
            let ret: Vec<f64> = chunk.iter().map(|&i| returns[i]).collect();

            let mut tape = Tape::new();
            let dist = perceive(&mut tape, &mcfg, &models.perception, &obs_seq, b)?;
            let head =
                decide(&mut tape, &mcfg, &models.decision, dist.mu, sim.v_max, sim.w_max)?;
            let va = tape.constant(&column(&v_act))?;
            let wa = tape.constant(&column(&w_act))?;
            let new_lp = policy_log_prob(&mut tape, &head, va, wa)?;
            let old = tape.constant(&column(&old_lp))?;
            let adv_id = tape.constant(&column(&adv))?;
            let (l_policy, ratio) = surrogate_loss(&mut tape, new_lp, old, adv_id, cfg.clip_eps)?;

            let ratio_vals = tape.value(ratio);
            let dev =
                ratio_vals.iter().map(|r| (r - 1.0).abs()).sum::<f64>() / ratio_vals.len() as f64;
            report.max_ratio_dev = report.max_ratio_dev.max(dev);
            if dev > RATIO_GUARD {
                eprintln!(
                    "warning: policy ratios deviate from 1 by {dev:.2} (> {RATIO_GUARD}); \
                     skipping the rest of this update"
                );
                report.guard_tripped = true;
                break 'epochs;
            }

            let values = value_of(&mut tape, &mcfg, &models.value, dist.mu)?;
            let ret_id = tape.constant(&column(&ret))?;
            let vdiff = tape.sub(values, ret_id)?;
            let vsq = tape.square(vdiff);
            let l_value = tape.mean_all(vsq);
            let h = policy_entropy(&mut tape, &head)?;

            let p_term = tape.scale(l_policy, cfg.alpha);
            let v_term = tape.scale(l_value, cfg.beta);
            let h_term = tape.scale(h, -cfg.eta);
            let pv = tape.add(p_term, v_term)?;
            let total = tape.add(pv, h_term)?;

            let lp_val = tape.scalar(l_policy);
            let lv_val = tape.scalar(l_value);
            let h_val = tape.scalar(h);
            if !tape.scalar(total).is_finite() {
                return Err(TrainError::NonFinite { what: "policy loss", iter: 0 });
            }
            let grads = tape.backward(total)?;
            drop(tape);
            optim.perception.step(&mut models.perception, &grads, cfg.lr_rl)?;
            optim.decision.step(&mut models.decision, &grads, cfg.lr_rl)?;
            optim.value.step(&mut models.value, &grads, cfg.lr_rl)?;

            report.l_policy += lp_val;
            report.l_value += lv_val;
            report.entropy += h_val;
            report.minibatches += 1;
        }
    }

    if report.minibatches > 0 {
        let n = report.minibatches as f64;
        report.l_policy /= n;
        report.l_value /= n;
        report.entropy /= n;
    }
    report.total =
        cfg.alpha * report.l_policy + cfg.beta * report.l_value - cfg.eta * report.entropy;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gae::compute_gae;
    use crate::rollout::{collect_rollout, EnvPool};
    use rand::SeedableRng;
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

    fn rollout_fixture(cfg: &TrainConfig, seed: u64) -> (ModelSet, RolloutBuffer) {
        let models = ModelSet::init(cfg.model_config(), seed);
        let mut pool = EnvPool::new(
            vec![by_name("train_open").unwrap()],
            SimParams::default(),
            cfg.n_envs,
            cfg.n,
            seed + 1,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 2);
        let buffer = collect_rollout(&mut pool, &models, cfg, &mut rng, false).unwrap();
        (models, buffer)
    }

    #[test]
    fn clip_engages_at_the_stated_ratio() {
        let mut tape = Tape::new();
        // ratio = exp(new - old) = 1.5 for every row.
        let new_lp = tape.constant_raw(2, 1, vec![1.5f64.ln(); 2]);
        let old_lp = tape.constant_raw(2, 1, vec![0.0; 2]);
        let adv = tape.constant_raw(2, 1, vec![1.0; 2]);
        let (loss, ratio) = surrogate_loss(&mut tape, new_lp, old_lp, adv, 0.2).unwrap();
        assert!((tape.value(ratio)[0] - 1.5).abs() < 1e-12);
        // Positive advantage: min(1.5, 1.2) = 1.2, loss = -1.2.
        assert!((tape.scalar(loss) + 1.2).abs() < 1e-12);

        // Negative advantage at ratio 0.5: min(-0.5, -0.8) = -0.8.
        let mut tape = Tape::new();
        let new_lp = tape.constant_raw(1, 1, vec![0.5f64.ln()]);
        let old_lp = tape.constant_raw(1, 1, vec![0.0]);
        let adv = tape.constant_raw(1, 1, vec![-1.0]);
        let (loss, _) = surrogate_loss(&mut tape, new_lp, old_lp, adv, 0.2).unwrap();
        assert!((tape.scalar(loss) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn identity_ratios_reduce_the_policy_loss_to_negative_mean_advantage() {
        let cfg = tiny_cfg();
        let (mut models, buffer) = rollout_fixture(&cfg, 31);
        let (adv, ret) = compute_gae(&buffer, cfg.gamma, cfg.gae_lambda);
        let mut optim = RlOptim::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // One epoch, one whole-buffer minibatch: stored log-probs equal the
        // recomputed ones bit for bit, so every ratio is exactly 1.
        let report = ppo_update(
            &mut models,
            &mut optim,
            &buffer,
            &adv,
            &ret,
            &cfg,
            &SimParams::default(),
            &mut rng,
        )
        .unwrap();
        let mean_adv: f64 = adv.iter().sum::<f64>() / adv.len() as f64;
        assert!(report.max_ratio_dev < 1e-12);
        assert!((report.l_policy - (-mean_adv)).abs() < 1e-10);
        assert_eq!(report.minibatches, 1);
    }

    #[test]
    fn reported_total_is_the_weighted_sum_of_parts() {
        let cfg = TrainConfig {
            epochs: 2,
            ..tiny_cfg()
        };
        let (mut models, buffer) = rollout_fixture(&cfg, 37);
        let (adv, ret) = compute_gae(&buffer, cfg.gamma, cfg.gae_lambda);
        let mut optim = RlOptim::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let report = ppo_update(
            &mut models,
            &mut optim,
            &buffer,
            &adv,
            &ret,
            &cfg,
            &SimParams::default(),
            &mut rng,
        )
        .unwrap();
        let expect =
            cfg.alpha * report.l_policy + cfg.beta * report.l_value - cfg.eta * report.entropy;
        assert!((report.total - expect).abs() < 1e-10);
        assert_eq!(report.minibatches, 2);
        assert!(report.entropy > 0.0);
    }

    #[test]
    fn runaway_ratios_trip_the_guard() {
        let cfg = tiny_cfg();
        let (mut models, mut buffer) = rollout_fixture(&cfg, 41);
        // Corrupt the stored log-probs so recomputed ratios explode.
        for s in &mut buffer.steps {
            s.log_prob -= 25.0;
        }
        let (adv, ret) = compute_gae(&buffer, cfg.gamma, cfg.gae_lambda);
        let mut optim = RlOptim::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = ppo_update(
            &mut models,
            &mut optim,
            &buffer,
            &adv,
            &ret,
            &cfg,
            &SimParams::default(),
            &mut rng,
        )
        .unwrap();
        assert!(report.guard_tripped);
        assert_eq!(report.minibatches, 0);
        assert!(report.max_ratio_dev > RATIO_GUARD);
    }
}
