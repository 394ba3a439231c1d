//! Discounted suffix sums of navigation rewards, used to weight reasoning
//! updates. Similarity rewards are deliberately excluded.

/// `out[t] = sum_{k >= t} gamma^(k - t) * nav[k]` over one episode.
pub fn discounted_returns(nav: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; nav.len()];
    let mut acc = 0.0;
    for t in (0..nav.len()).rev() {
        acc = nav[t] + gamma * acc;
        out[t] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_hand_arithmetic() {
        let got = discounted_returns(&[1.0, 1.0, 1.0], 0.5);
        assert_eq!(got, vec![1.75, 1.5, 1.0]);
    }

    #[test]
    fn zero_discount_returns_the_rewards() {
        let r = [0.3, -2.0, 5.0];
        assert_eq!(discounted_returns(&r, 0.0), r.to_vec());
    }

    #[test]
    fn empty_episode_yields_empty_returns() {
        assert!(discounted_returns(&[], 0.99).is_empty());
    }

    #[test]
    fn terminal_step_keeps_its_own_reward() {
        let got = discounted_returns(&[0.1, 0.2, 30.0], 0.99);
        assert_eq!(got[2], 30.0);
        assert!((got[1] - (0.2 + 0.99 * 30.0)).abs() < 1e-12);
    }
}
