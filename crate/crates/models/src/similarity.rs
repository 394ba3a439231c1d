//! Reward-side Gaussian math. These run on plain numbers during rollouts;
//! nothing here is differentiated.

use crate::graphs::LN_2PI;

/// Floor applied to the log similarity before exponentiation, bounding the
/// reward away from exact zero.
pub const LOG_SIMILARITY_FLOOR: f64 = -20.0;

/// Log density of `x` under the diagonal Gaussian `N(mu, exp(logvar))`.
pub fn gaussian_log_density(x: &[f64], mu: &[f64], logvar: &[f64]) -> f64 {
    assert_eq!(x.len(), mu.len());
    assert_eq!(x.len(), logvar.len());
    let mut acc = -0.5 * x.len() as f64 * LN_2PI;
    for i in 0..x.len() {
        let d = x[i] - mu[i];
        acc -= 0.5 * (logvar[i] + d * d * (-logvar[i]).exp());
    }
    acc
}

/// Similarity of a latent sample to a latent distribution, in
/// `[exp(-20), 1]`: the density of `sample` under `N(mu, exp(logvar))`
/// divided by the peak density of a same-dimension standard normal, clamped
/// in log space. Equals 1 when the sample sits at the mean of a unit-variance
/// distribution, and decays with the squared Mahalanobis distance.
pub fn similarity_reward(sample: &[f64], mu: &[f64], logvar: &[f64]) -> f64 {
    assert_eq!(sample.len(), mu.len());
    assert_eq!(sample.len(), logvar.len());
    // The -k/2*ln(2pi) terms of the density and the normalizer cancel.
    let mut log_ratio = 0.0;
    for i in 0..sample.len() {
        let d = sample[i] - mu[i];
        log_ratio -= 0.5 * (logvar[i] + d * d * (-logvar[i]).exp());
    }
    log_ratio.clamp(LOG_SIMILARITY_FLOOR, 0.0).exp()
}
