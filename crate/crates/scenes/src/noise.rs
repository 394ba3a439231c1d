//! Evaluation-time sensor noise.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use simworld::{ObsVector, LIDAR_BEAMS, OBS_LEN};

/// Adds Gaussian noise to the lidar block of an observation and clamps it
/// back into [0, 1]. Goal and velocity entries pass through unchanged.
/// Draws exactly `LIDAR_BEAMS` samples when `std > 0`, none otherwise.
pub fn apply_obs_noise(obs: &ObsVector, std: f64, rng: &mut ChaCha8Rng) -> ObsVector {
    if std <= 0.0 {
        return obs.clone();
    }
    let noise = Normal::new(0.0, std).expect("noise std must be finite");
    let mut values = [0.0; OBS_LEN];
    values.copy_from_slice(obs.as_slice());
    for v in values.iter_mut().take(LIDAR_BEAMS) {
        *v = (*v + noise.sample(rng)).clamp(0.0, 1.0);
    }
    ObsVector::from_array(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn half_range_obs() -> ObsVector {
        let mut values = [0.5; OBS_LEN];
        values[LIDAR_BEAMS] = 0.7;
        values[LIDAR_BEAMS + 1] = -0.3;
        values[LIDAR_BEAMS + 2] = 0.9;
        values[LIDAR_BEAMS + 3] = -0.1;
        ObsVector::from_array(values)
    }

    #[test]
    fn zero_std_is_identity() {
        let obs = half_range_obs();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(apply_obs_noise(&obs, 0.0, &mut rng), obs);
    }

    #[test]
    fn noise_touches_only_lidar_and_stays_bounded() {
        let obs = half_range_obs();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noisy = apply_obs_noise(&obs, 0.1, &mut rng);
        assert_eq!(&noisy.as_slice()[LIDAR_BEAMS..], &obs.as_slice()[LIDAR_BEAMS..]);
        assert!(noisy.lidar().iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_ne!(noisy.lidar(), obs.lidar());
    }
}
