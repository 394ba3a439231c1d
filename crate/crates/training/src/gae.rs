//! Generalized advantage estimation over the rollout buffer.

use crate::rollout::RolloutBuffer;

/// Raw advantages for one episode. `bootstrap` is the value of the state
/// after the final step, used only when the episode was cut short.
pub fn gae_episode(
    rewards: &[f64],
    values: &[f64],
    terminated: bool,
    bootstrap: f64,
    gamma: f64,
    lam: f64,
) -> Vec<f64> {
    assert_eq!(rewards.len(), values.len());
    let mut adv = vec![0.0; rewards.len()];
    let mut next_value = if terminated { 0.0 } else { bootstrap };
    let mut next_adv = 0.0;
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        next_adv = delta + gamma * lam * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    adv
}

/// Buffer-wide advantages and value targets. Returns are raw advantages
/// plus values; advantages are then normalized to zero mean and unit
/// standard deviation across the buffer.
pub fn compute_gae(buffer: &RolloutBuffer, gamma: f64, lam: f64) -> (Vec<f64>, Vec<f64>) {
    let mut advantages = vec![0.0; buffer.steps.len()];
    for span in &buffer.spans {
        let rewards: Vec<f64> =
            buffer.steps[span.start..span.end].iter().map(|s| s.reward).collect();
        let values: Vec<f64> =
            buffer.steps[span.start..span.end].iter().map(|s| s.value).collect();
        let adv = gae_episode(
            &rewards,
            &values,
            span.terminated,
            buffer.bootstrap[span.env],
            gamma,
            lam,
        );
        advantages[span.start..span.end].copy_from_slice(&adv);
    }
    let returns: Vec<f64> = advantages
        .iter()
        .zip(&buffer.steps)
        .map(|(a, s)| a + s.value)
        .collect();

    let n = advantages.len().max(1) as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in &mut advantages {
        *a = (*a - mean) / (std + 1e-8);
    }
    (advantages, returns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rollout::{EpisodeSpan, StepSample};
    use simworld::Event;

    fn step(reward: f64, value: f64, event: Event) -> StepSample {
        StepSample {
            obs_rows: Vec::new(),
            act_rows: Vec::new(),
            mu_p: Vec::new(),
            action: [0.0; 2],
            log_prob: 0.0,
            value,
            r_nav: reward,
            r_sim: 0.0,
            reward,
            event,
        }
    }

    #[test]
    fn terminal_single_step_advantage_is_reward_minus_value() {
        let adv = gae_episode(&[3.0], &[1.25], true, 99.0, 0.99, 0.95);
        assert!((adv[0] - (3.0 - 1.25)).abs() < 1e-12);
    }

    #[test]
    fn zero_discount_is_the_myopic_limit() {
        let adv = gae_episode(&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.5], true, 0.0, 0.0, 0.95);
        assert_eq!(adv, vec![0.5, 1.5, 2.5]);
    }

    #[test]
    fn three_step_recursion_matches_hand_arithmetic() {
        // gamma = lam = 0.5, rewards 1, values 1, terminal end:
        // delta2 = 1 - 1 = 0            -> adv2 = 0
        // delta1 = 1 + 0.5 - 1 = 0.5    -> adv1 = 0.5 + 0.25 * 0    = 0.5
        // delta0 = 1 + 0.5 - 1 = 0.5    -> adv0 = 0.5 + 0.25 * 0.5  = 0.625
        let adv = gae_episode(&[1.0; 3], &[1.0; 3], true, 0.0, 0.5, 0.5);
        assert_eq!(adv, vec![0.625, 0.5, 0.0]);
    }

    #[test]
    fn truncated_episodes_bootstrap_with_the_next_value() {
        let adv = gae_episode(&[1.0], &[1.0], false, 2.0, 0.5, 0.5);
        // delta = 1 + 0.5 * 2 - 1 = 1.
        assert_eq!(adv, vec![1.0]);
    }

    #[test]
    fn buffer_advantages_are_normalized_and_returns_are_not() {
        let steps = vec![
            step(1.0, 0.2, Event::Alive),
            step(1.0, 0.1, Event::Reached),
            step(-1.0, 0.3, Event::Alive),
            step(0.5, 0.0, Event::Alive),
        ];
        let buffer = RolloutBuffer {
            steps,
            spans: vec![
                EpisodeSpan { start: 0, end: 2, terminated: true, event: Event::Reached, env: 0 },
                EpisodeSpan { start: 2, end: 4, terminated: false, event: Event::Alive, env: 1 },
            ],
            bootstrap: vec![0.0, 0.7],
        };
        let (adv, ret) = compute_gae(&buffer, 0.9, 0.8);
        assert_eq!(adv.len(), 4);
        let mean: f64 = adv.iter().sum::<f64>() / 4.0;
        let var: f64 = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-9);
        assert!((var.sqrt() - 1.0).abs() < 1e-6);

        // Returns stay raw: advantage + value, computed pre-normalization.
        let raw0 = gae_episode(&[1.0, 1.0], &[0.2, 0.1], true, 0.0, 0.9, 0.8);
        assert!((ret[0] - (raw0[0] + 0.2)).abs() < 1e-12);
        assert!((ret[1] - (raw0[1] + 0.1)).abs() < 1e-12);
    }
}
