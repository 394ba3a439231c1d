//! Reasoning-model updates weighted by discounted navigation returns.
//! Runs once every `reasoning_period` policy updates, on completed
//! episodes only.

use autonn::{NnError, Tape, Tensor, ValueId};
use models::{reason, sample_latent, ModelSet};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::TrainConfig;
use crate::error::TrainError;
use crate::losses::standard_reg_mean;
use crate::ppo::RlOptim;
use crate::returns::discounted_returns;
use crate::rollout::{RolloutBuffer, ACT_DIM};

/// Update batches are capped at this many sampled steps, matching the
/// policy minibatch scale.
pub const DRW_BATCH_CAP: usize = 256;

#[derive(Clone, Copy, Debug)]
pub struct DrwReport {
    /// Weighted squared distance between perceived means and reasoning
    /// samples, batch mean.
    pub l_r1: f64,
    /// Prior regularizer on the reasoning distribution, batch mean.
    pub l_r2: f64,
    /// `l_r1 + lambda * l_r2`, recomputed from the reported parts.
    pub total: f64,
    pub zero_weight: bool,
    pub steps_used: usize,
}

/// Steps usable for a reasoning update: members of episodes that actually
/// terminated inside the buffer, paired with `max(R_discount, 0)` computed
/// from navigation rewards alone.
pub fn eligible_weights(buffer: &RolloutBuffer, gamma: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for span in &buffer.spans {
        if !span.terminated {
            continue;
        }
        let nav: Vec<f64> = buffer.steps[span.start..span.end].iter().map(|s| s.r_nav).collect();
        let disc = discounted_returns(&nav, gamma);
        for (k, d) in disc.iter().enumerate() {
            out.push((span.start + k, d.max(0.0)));
        }
    }
    out
}

/// Loss graph: `l1` the weighted reconstruction distance, `l2` the prior
/// regularizer (no 1/2 factor), `total = l1 + lambda * l2`.
#[allow(clippy::too_many_arguments)]
pub fn drw_losses(
    tape: &mut Tape,
    models: &ModelSet,
    act_seq: &[Tensor],
    batch: usize,
    mu_p: &Tensor,
    weights: &Tensor,
    lambda: f64,
    eps: &Tensor,
) -> Result<(ValueId, ValueId, ValueId), NnError> {
    let mcfg = &models.config;
    let r = reason(tape, mcfg, &models.reasoning, act_seq, batch)?;
    let s_r = sample_latent(tape, &r, eps)?;
    let target = tape.constant(mu_p)?;
    let diff = tape.sub(target, s_r)?;
    let sq = tape.square(diff);
    let dist = tape.sum_rows(sq);
    let w = tape.constant(weights)?;
    let weighted = tape.mul(dist, w)?;
    let l1 = tape.mean_all(weighted);
    let l2 = standard_reg_mean(tape, &r)?;
    let l2_term = tape.scale(l2, lambda);
    let total = tape.add(l1, l2_term)?;
    Ok((l1, l2, total))
}

/// One reasoning-only gradient step. Returns `None` when the buffer holds
/// no completed episode. With `unit_weights` every eligible step weighs 1
/// (the weighting ablation); otherwise weights are normalized by the batch
/// max, and an all-nonpositive batch degrades to the regularizer alone.
pub fn drw_update(
    models: &mut ModelSet,
    optim: &mut RlOptim,
    buffer: &RolloutBuffer,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    unit_weights: bool,
) -> Result<Option<DrwReport>, TrainError> {
    let mut eligible = eligible_weights(buffer, cfg.gamma);
    if eligible.is_empty() {
        return Ok(None);
    }
    eligible.shuffle(rng);
    eligible.truncate(DRW_BATCH_CAP);
    let b = eligible.len();

    let mut zero_weight = false;
    let weights: Vec<f64> = if unit_weights {
        vec![1.0; b]
    } else {
        let max = eligible.iter().map(|&(_, w)| w).fold(0.0f64, f64::max);
        if max > 0.0 {
            eligible.iter().map(|&(_, w)| w / max).collect()
        } else {
            zero_weight = true;
            eprintln!(
                "warning: no positive discounted return in the reasoning batch; \
                 applying the regularizer only"
            );
            vec![0.0; b]
        }
    };

    let mcfg = models.config.clone();
    let act_seq: Vec<Tensor> = (0..mcfg.window)
        .map(|k| {
            let flat: Vec<f64> = eligible
                .iter()
                .flat_map(|&(i, _)| buffer.steps[i].act_rows[k].iter().copied())
                .collect();
            Tensor::matrix(b, ACT_DIM, flat).expect("window rows are rectangular")
        })
        .collect();
    let mu_p_flat: Vec<f64> =
        eligible.iter().flat_map(|&(i, _)| buffer.steps[i].mu_p.iter().copied()).collect();
    let mu_p = Tensor::matrix(b, mcfg.latent_dim, mu_p_flat).expect("latent rows");
    let w = Tensor::matrix(b, 1, weights).expect("column shape");
    let eps = Tensor::matrix(
        b,
        mcfg.latent_dim,
        (0..b * mcfg.latent_dim).map(|_| rng.sample(StandardNormal)).collect(),
    )
    .expect("latent rows");

    let mut tape = Tape::new();
    let (l1, l2, _total) = drw_losses(&mut tape, models, &act_seq, b, &mu_p, &w, cfg.lambda, &eps)?;
    let l1_val = tape.scalar(l1);
    let l2_val = tape.scalar(l2);
    let total_val = l1_val + cfg.lambda * l2_val;
    if !total_val.is_finite() {
        return Err(TrainError::NonFinite { what: "reasoning loss", iter: 0 });
    }
    let grads = tape.backward(_total)?;
    drop(tape);
    optim.reasoning.step(&mut models.reasoning, &grads, cfg.lr_rl)?;

    Ok(Some(DrwReport {
        l_r1: l1_val,
        l_r2: l2_val,
        total: total_val,
        zero_weight,
        steps_used: b,
    }))
}
