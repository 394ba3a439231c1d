//! Tape graph builders for the policy networks. Everything here records
//! differentiable operations; plain-number reward math lives elsewhere.

use autonn::{NnError, ParamSet, Tape, Tensor, ValueId};

use crate::config::ModelConfig;

/// Bounds on the action log standard deviation, applied in-graph.
pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;

pub const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Diagonal Gaussian over the latent space; both fields are `[B, latent]`.
#[derive(Clone, Copy, Debug)]
pub struct LatentDist {
    pub mu: ValueId,
    pub logvar: ValueId,
}

fn encode(
    tape: &mut Tape,
    lstm: autonn::LstmSpec,
    head: autonn::MlpSpec,
    params: &ParamSet,
    seq: &[Tensor],
    batch: usize,
    latent_dim: usize,
) -> Result<LatentDist, NnError> {
    let h = lstm.forward(tape, params, seq, batch)?;
    let out = head.forward(tape, params, h)?;
    Ok(LatentDist {
        mu: tape.slice_cols(out, 0, latent_dim)?,
        logvar: tape.slice_cols(out, latent_dim, 2 * latent_dim)?,
    })
}

/// Observation window `[B, obs_dim]` frames -> latent Gaussian.
pub fn perceive(
    tape: &mut Tape,
    cfg: &ModelConfig,
    params: &ParamSet,
    seq: &[Tensor],
    batch: usize,
) -> Result<LatentDist, NnError> {
    encode(
        tape,
        cfg.perception_lstm(),
        cfg.perception_head(),
        params,
        seq,
        batch,
        cfg.latent_dim,
    )
}

/// Action window `[B, act_dim]` frames -> latent Gaussian.
pub fn reason(
    tape: &mut Tape,
    cfg: &ModelConfig,
    params: &ParamSet,
    seq: &[Tensor],
    batch: usize,
) -> Result<LatentDist, NnError> {
    encode(
        tape,
        cfg.reasoning_lstm(),
        cfg.reasoning_head(),
        params,
        seq,
        batch,
        cfg.latent_dim,
    )
}

/// Reparameterized draw `z = mu + exp(logvar / 2) * eps`; gradients flow
/// into both distribution parameters. `eps` must be `[B, latent]`.
pub fn sample_latent(tape: &mut Tape, dist: &LatentDist, eps: &Tensor) -> Result<ValueId, NnError> {
    let half_logvar = tape.scale(dist.logvar, 0.5);
    let std = tape.exp(half_logvar);
    let e = tape.constant(eps)?;
    let noise = tape.mul(std, e)?;
    tape.add(dist.mu, noise)
}

/// Action distribution produced by the decision network. Means are `[B, 1]`
/// per dimension; log stds are `[1, 1]` state-independent parameters,
/// already clamped.
#[derive(Clone, Copy, Debug)]
pub struct PolicyHead {
    /// Linear velocity mean in `[0, v_max]`.
    pub v_mean: ValueId,
    /// Angular velocity mean in `[-w_max, w_max]`.
    pub w_mean: ValueId,
    pub log_std_v: ValueId,
    pub log_std_w: ValueId,
}

/// Latent `[B, latent]` -> action Gaussian.
pub fn decide(
    tape: &mut Tape,
    cfg: &ModelConfig,
    params: &ParamSet,
    latent: ValueId,
    v_max: f64,
    w_max: f64,
) -> Result<PolicyHead, NnError> {
    let raw = cfg.decision_mlp().forward(tape, params, latent)?;
    let v_raw = tape.slice_cols(raw, 0, 1)?;
    let w_raw = tape.slice_cols(raw, 1, 2)?;
    let v_unit = tape.sigmoid(v_raw);
    let w_unit = tape.tanh(w_raw);
    let log_std = params.feed(tape, "log_std")?;
    let log_std = tape.clamp(log_std, LOG_STD_MIN, LOG_STD_MAX);
    Ok(PolicyHead {
        v_mean: tape.scale(v_unit, v_max),
        w_mean: tape.scale(w_unit, w_max),
        log_std_v: tape.slice_cols(log_std, 0, 1)?,
        log_std_w: tape.slice_cols(log_std, 1, 2)?,
    })
}

/// Latent `[B, latent]` -> state value `[B, 1]`.
pub fn value_of(
    tape: &mut Tape,
    cfg: &ModelConfig,
    params: &ParamSet,
    latent: ValueId,
) -> Result<ValueId, NnError> {
    cfg.value_mlp().forward(tape, params, latent)
}

fn dim_log_prob(
    tape: &mut Tape,
    mean: ValueId,
    log_std: ValueId,
    act: ValueId,
) -> Result<ValueId, NnError> {
    let diff = tape.sub(act, mean)?;
    let sq = tape.square(diff);
    let neg2ls = tape.scale(log_std, -2.0);
    let inv_var = tape.exp(neg2ls);
    let quad = tape.mul_row(sq, inv_var)?;
    let half_quad = tape.scale(quad, -0.5);
    let neg_ls = tape.neg(log_std);
    let shift = tape.add_scalar(neg_ls, -0.5 * LN_2PI);
    tape.add_row(half_quad, shift)
}

/// Log-density `[B, 1]` of executed actions under the policy Gaussian,
/// summed over both action dimensions. `v_act` and `w_act` are `[B, 1]`.
pub fn policy_log_prob(
    tape: &mut Tape,
    head: &PolicyHead,
    v_act: ValueId,
    w_act: ValueId,
) -> Result<ValueId, NnError> {
    let lv = dim_log_prob(tape, head.v_mean, head.log_std_v, v_act)?;
    let lw = dim_log_prob(tape, head.w_mean, head.log_std_w, w_act)?;
    tape.add(lv, lw)
}

/// Differential entropy `[1, 1]` of the policy Gaussian: state-independent
/// because the stds are. Equals `sum(log_std) + dim/2 * ln(2*pi*e)`.
pub fn policy_entropy(tape: &mut Tape, head: &PolicyHead) -> Result<ValueId, NnError> {
    let s = tape.add(head.log_std_v, head.log_std_w)?;
    Ok(tape.add_scalar(s, LN_2PI + 1.0))
}
