//! Parallel-episode experience collection for the PPO stage.

use autonn::{Tape, Tensor};
use models::{decide, perceive, reason, similarity_reward, value_of, ActWindow, LN_2PI, ModelSet, ObsWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use scenes::{apply_obs_noise, build_scene, SceneSpec};
use simworld::{ActionCmd, Event, ObsVector, SimParams, World, OBS_LEN};

use crate::config::TrainConfig;
use crate::error::TrainError;

pub const ACT_DIM: usize = 2;

/// One environment transition plus everything PPO and the reasoning update
/// need to rebuild their graphs later.
#[derive(Clone, Debug)]
pub struct StepSample {
    /// Observation window at decision time, oldest row first.
    pub obs_rows: Vec<Vec<f64>>,
    /// Action window with the executed action in the final row.
    pub act_rows: Vec<Vec<f64>>,
    /// Perceived latent mean used as the policy input.
    pub mu_p: Vec<f64>,
    /// Raw policy sample, before environment clamping.
    pub action: [f64; 2],
    pub log_prob: f64,
    pub value: f64,
    pub r_nav: f64,
    pub r_sim: f64,
    /// `r_sim + r_nav`.
    pub reward: f64,
    pub event: Event,
}

/// Contiguous run of buffer steps belonging to one episode (or the part of
/// it that fell inside this rollout).
#[derive(Clone, Copy, Debug)]
pub struct EpisodeSpan {
    pub start: usize,
    pub end: usize,
    /// False when the rollout window cut the episode short.
    pub terminated: bool,
    pub event: Event,
    pub env: usize,
}

/// A finished episode, for logging.
#[derive(Clone, Debug)]
pub struct EpisodeStat {
    pub scene: String,
    pub steps: usize,
    pub combined_return: f64,
    pub nav_return: f64,
    pub event: Event,
}

#[derive(Debug)]
pub struct RolloutBuffer {
    pub steps: Vec<StepSample>,
    pub spans: Vec<EpisodeSpan>,
    /// Value estimate of each env's post-rollout state, for bootstrapping
    /// spans the horizon cut short.
    pub bootstrap: Vec<f64>,
}

impl RolloutBuffer {
    pub fn mean_r_sim(&self) -> f64 {
        if self.steps.is_empty() {
            return 0.0;
        }
        self.steps.iter().map(|s| s.r_sim).sum::<f64>() / self.steps.len() as f64
    }
}

struct EnvSlot {
    world: World,
    scene: usize,
    obs_win: ObsWindow,
    act_win: ActWindow,
    combined_return: f64,
    nav_return: f64,
    steps: usize,
}

/// Round-robin pool of simulator episodes. Episode state (world and both
/// windows) persists across rollout calls, so an episode can span buffers.
pub struct EnvPool {
    specs: Vec<SceneSpec>,
    sim: SimParams,
    window: usize,
    rng: ChaCha8Rng,
    slots: Vec<EnvSlot>,
    next_scene: usize,
    completed: Vec<EpisodeStat>,
}

impl EnvPool {
    pub fn new(
        specs: Vec<SceneSpec>,
        sim: SimParams,
        n_envs: usize,
        window: usize,
        seed: u64,
    ) -> Result<Self, TrainError> {
        assert!(!specs.is_empty() && n_envs > 0 && window > 1);
        let mut pool = Self {
            specs,
            sim,
            window,
            rng: ChaCha8Rng::seed_from_u64(seed),
            slots: Vec::new(),
            next_scene: 0,
            completed: Vec::new(),
        };
        for _ in 0..n_envs {
            let slot = pool.fresh_slot()?;
            pool.slots.push(slot);
        }
        Ok(pool)
    }

    pub fn n_envs(&self) -> usize {
        self.slots.len()
    }

    /// Episodes finished since the last drain.
    pub fn drain_completed(&mut self) -> Vec<EpisodeStat> {
        std::mem::take(&mut self.completed)
    }

    fn fresh_slot(&mut self) -> Result<EnvSlot, TrainError> {
        let scene = self.next_scene % self.specs.len();
        self.next_scene += 1;
        let seed = self.rng.random::<u64>();
        let world = build_scene(&self.specs[scene], self.sim.clone(), seed)?;
        let mut obs_win = ObsWindow::new(self.window, OBS_LEN);
        let first = self.noisy(scene, &world.observe());
        obs_win.push(first.as_slice());
        Ok(EnvSlot {
            world,
            scene,
            obs_win,
            act_win: ActWindow::new(self.window, ACT_DIM),
            combined_return: 0.0,
            nav_return: 0.0,
            steps: 0,
        })
    }

    fn noisy(&mut self, scene: usize, obs: &ObsVector) -> ObsVector {
        let std = self.specs[scene].obs_noise_std;
        apply_obs_noise(obs, std, &mut self.rng)
    }
}

/// Per-dimension Gaussian log density matching the policy graph's operation
/// order exactly, so PPO ratios start at precisely 1.
fn dim_log_prob_plain(a: f64, mean: f64, log_std: f64) -> f64 {
    let shift = -log_std + (-0.5 * LN_2PI);
    let d = a - mean;
    ((d * d) * (-2.0 * log_std).exp()) * -0.5 + shift
}

/// Gathers `cfg.horizon` transitions across the pool, `horizon / n_envs`
/// from each env, stored env-major. With `no_reasoning` the reasoning model
/// is never invoked and `r_sim` is recorded as zero.
pub fn collect_rollout(
    pool: &mut EnvPool,
    models: &ModelSet,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    no_reasoning: bool,
) -> Result<RolloutBuffer, TrainError> {
    let n_envs = pool.n_envs();
    assert_eq!(cfg.horizon % n_envs, 0, "config validation enforces divisibility");
    let t_steps = cfg.horizon / n_envs;
    let mcfg = &models.config;
    let window = pool.window;

    let mut per_env: Vec<Vec<StepSample>> = (0..n_envs).map(|_| Vec::with_capacity(t_steps)).collect();
    let mut spans: Vec<Vec<(usize, usize, bool, Event)>> = vec![Vec::new(); n_envs];
    let mut ep_start = vec![0usize; n_envs];

    for t in 0..t_steps {
        // Batched actor forward over every env's current window.
        let mut tape = Tape::new();
        let obs_seq = obs_seq_tensors(&pool.slots, window, mcfg.obs_dim);
        let dist = perceive(&mut tape, mcfg, &models.perception, &obs_seq, n_envs)?;
        let head =
            decide(&mut tape, mcfg, &models.decision, dist.mu, pool.sim.v_max, pool.sim.w_max)?;
        let values = value_of(&mut tape, mcfg, &models.value, dist.mu)?;

        let mu_all = tape.value(dist.mu).to_vec();
        let v_means = tape.value(head.v_mean).to_vec();
        let w_means = tape.value(head.w_mean).to_vec();
        let ls_v = tape.scalar(head.log_std_v);
        let ls_w = tape.scalar(head.log_std_w);
        let vals = tape.value(values).to_vec();
        drop(tape);

        // Sample an action per env and snapshot the windows.
        let mut executed = Vec::with_capacity(n_envs);
        let mut raw_actions = Vec::with_capacity(n_envs);
        let mut log_probs = Vec::with_capacity(n_envs);
        let mut act_rows_all = Vec::with_capacity(n_envs);
        for (e, slot) in pool.slots.iter().enumerate() {
            let eps_v: f64 = rng.sample(StandardNormal);
            let eps_w: f64 = rng.sample(StandardNormal);
            let v_raw = v_means[e] + ls_v.exp() * eps_v;
            let w_raw = w_means[e] + ls_w.exp() * eps_w;
            let lp = dim_log_prob_plain(v_raw, v_means[e], ls_v)
                + dim_log_prob_plain(w_raw, w_means[e], ls_w);
            let cmd = ActionCmd::new(v_raw, w_raw).clamped(pool.sim.v_max, pool.sim.w_max);
            let pending = [cmd.v, cmd.w];
            let rows: Vec<Vec<f64>> =
                (0..window).map(|k| slot.act_win.row_with(k, &pending).to_vec()).collect();
            raw_actions.push([v_raw, w_raw]);
            log_probs.push(lp);
            executed.push(cmd);
            act_rows_all.push(rows);
        }

        // Reasoning pass over the action windows that include a_t.
        let r_sims = if no_reasoning {
            vec![0.0; n_envs]
        } else {
            let mut tape = Tape::new();
            let act_seq: Vec<Tensor> = (0..window)
                .map(|k| {
                    let flat: Vec<f64> =
                        act_rows_all.iter().flat_map(|rows| rows[k].iter().copied()).collect();
                    Tensor::matrix(n_envs, ACT_DIM, flat).expect("window rows are rectangular")
                })
                .collect();
            let r_dist = reason(&mut tape, mcfg, &models.reasoning, &act_seq, n_envs)?;
            let mu_r = tape.value(r_dist.mu).to_vec();
            let lv_r = tape.value(r_dist.logvar).to_vec();
            (0..n_envs)
                .map(|e| {
                    let lo = e * mcfg.latent_dim;
                    let hi = lo + mcfg.latent_dim;
                    similarity_reward(&mu_all[lo..hi], &mu_r[lo..hi], &lv_r[lo..hi])
                })
                .collect()
        };

        // Advance every env.
        for e in 0..n_envs {
            let slot = &mut pool.slots[e];
            let obs_rows: Vec<Vec<f64>> =
                (0..window).map(|k| slot.obs_win.row(k).to_vec()).collect();
            let outcome = slot
                .world
                .step_episode(executed[e])
                .map_err(|err| TrainError::Dataset { msg: format!("simulator: {err}") })?;
            let r_nav = outcome.nav_reward;
            let reward = r_sims[e] + r_nav;
            slot.combined_return += reward;
            slot.nav_return += r_nav;
            slot.steps += 1;

            let lo = e * mcfg.latent_dim;
            per_env[e].push(StepSample {
                obs_rows,
                act_rows: std::mem::take(&mut act_rows_all[e]),
                mu_p: mu_all[lo..lo + mcfg.latent_dim].to_vec(),
                action: raw_actions[e],
                log_prob: log_probs[e],
                value: vals[e],
                r_nav,
                r_sim: r_sims[e],
                reward,
                event: outcome.event,
            });

            if outcome.event.is_terminal() {
                spans[e].push((ep_start[e], t + 1, true, outcome.event));
                ep_start[e] = t + 1;
                let scene_name = pool.specs[pool.slots[e].scene].name.clone();
                let slot = &pool.slots[e];
                pool.completed.push(EpisodeStat {
                    scene: scene_name,
                    steps: slot.steps,
                    combined_return: slot.combined_return,
                    nav_return: slot.nav_return,
                    event: outcome.event,
                });
                pool.slots[e] = pool.fresh_slot()?;
            } else {
                let scene = pool.slots[e].scene;
                let noisy = pool.noisy(scene, &outcome.obs);
                let slot = &mut pool.slots[e];
                slot.obs_win.push(noisy.as_slice());
                slot.act_win.push(&[executed[e].v, executed[e].w]);
            }
        }
    }

    // Close out partial episodes and bootstrap their final values.
    for e in 0..n_envs {
        if ep_start[e] < t_steps {
            spans[e].push((ep_start[e], t_steps, false, Event::Alive));
        }
    }
    let mut tape = Tape::new();
    let obs_seq = obs_seq_tensors(&pool.slots, window, mcfg.obs_dim);
    let dist = perceive(&mut tape, mcfg, &models.perception, &obs_seq, n_envs)?;
    let values = value_of(&mut tape, mcfg, &models.value, dist.mu)?;
    let bootstrap = tape.value(values).to_vec();

    let mut steps = Vec::with_capacity(cfg.horizon);
    let mut all_spans = Vec::new();
    for (e, env_steps) in per_env.into_iter().enumerate() {
        let base = steps.len();
        for (start, end, terminated, event) in &spans[e] {
            all_spans.push(EpisodeSpan {
                start: base + start,
                end: base + end,
                terminated: *terminated,
                event: *event,
                env: e,
            });
        }
        steps.extend(env_steps);
    }
    Ok(RolloutBuffer { steps, spans: all_spans, bootstrap })
}

fn obs_seq_tensors(slots: &[EnvSlot], window: usize, obs_dim: usize) -> Vec<Tensor> {
    (0..window)
        .map(|k| {
            let flat: Vec<f64> =
                slots.iter().flat_map(|s| s.obs_win.row(k).iter().copied()).collect();
            Tensor::matrix(slots.len(), obs_dim, flat).expect("window rows are rectangular")
        })
        .collect()
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

    fn models_for(cfg: &TrainConfig) -> ModelSet {
        ModelSet::init(cfg.model_config(), 7)
    }

    #[test]
    fn single_step_rollout_populates_every_field() {
        let cfg = TrainConfig {
            horizon: 1,
            n_envs: 1,
            minibatch: 1,
            ..TrainConfig::default()
        };
        let models = models_for(&cfg);
        let mut pool = EnvPool::new(
            vec![by_name("train_open").unwrap()],
            SimParams::default(),
            1,
            cfg.n,
            3,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let buf = collect_rollout(&mut pool, &models, &cfg, &mut rng, false).unwrap();

        assert_eq!(buf.steps.len(), 1);
        assert_eq!(buf.spans.len(), 1);
        assert_eq!(buf.bootstrap.len(), 1);
        let s = &buf.steps[0];
        assert_eq!(s.obs_rows.len(), cfg.n);
        assert_eq!(s.obs_rows[0].len(), OBS_LEN);
        assert_eq!(s.act_rows.len(), cfg.n);
        assert_eq!(s.act_rows[0].len(), ACT_DIM);
        assert_eq!(s.mu_p.len(), cfg.latent_dim);
        assert!(s.log_prob.is_finite());
        assert!(s.value.is_finite());
        assert!(s.r_sim > 0.0 && s.r_sim <= 1.0);
        assert_eq!(s.reward, s.r_sim + s.r_nav);
    }

    #[test]
    fn rewards_compose_and_windows_align() {
        let cfg = tiny_cfg();
        let models = models_for(&cfg);
        let mut pool = EnvPool::new(
            vec![by_name("train_open").unwrap(), by_name("train_sparse").unwrap()],
            SimParams::default(),
            cfg.n_envs,
            cfg.n,
            11,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let buf = collect_rollout(&mut pool, &models, &cfg, &mut rng, false).unwrap();

        assert_eq!(buf.steps.len(), cfg.horizon);
        for s in &buf.steps {
            assert_eq!(s.reward, s.r_sim + s.r_nav);
            assert!(s.r_sim > 0.0 && s.r_sim <= 1.0);
            // The executed (clamped) action sits in the final window row.
            let exec = &s.act_rows[cfg.n - 1];
            assert!((0.0..=1.0).contains(&exec[0]));
            assert!((-1.0..=1.0).contains(&exec[1]));
        }
        // Env-major layout: spans tile the buffer without overlap.
        let mut covered = vec![false; buf.steps.len()];
        for span in &buf.spans {
            assert!(span.start < span.end && span.end <= buf.steps.len());
            for trap in &mut covered[span.start..span.end] {
                assert!(!*trap);
                *trap = true;
            }
        }
        assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn ablated_reasoning_records_zero_similarity() {
        let cfg = tiny_cfg();
        let models = models_for(&cfg);
        let mut pool = EnvPool::new(
            vec![by_name("train_open").unwrap()],
            SimParams::default(),
            cfg.n_envs,
            cfg.n,
            11,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let buf = collect_rollout(&mut pool, &models, &cfg, &mut rng, true).unwrap();
        assert!(buf.steps.iter().all(|s| s.r_sim == 0.0));
        assert!(buf.steps.iter().all(|s| s.reward == s.r_nav));
    }

    #[test]
    fn identical_seeds_reproduce_the_rollout() {
        let cfg = tiny_cfg();
        let models = models_for(&cfg);
        let run = || {
            let mut pool = EnvPool::new(
                vec![by_name("train_dense").unwrap()],
                SimParams::default(),
                cfg.n_envs,
                cfg.n,
                21,
            )
            .unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            collect_rollout(&mut pool, &models, &cfg, &mut rng, false).unwrap()
        };
        let a = run();
        let b = run();
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.action, y.action);
            assert_eq!(x.reward, y.reward);
            assert_eq!(x.log_prob, y.log_prob);
        }
        assert_eq!(a.bootstrap, b.bootstrap);
    }
}
