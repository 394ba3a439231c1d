//! Latent-space losses: plain-number forms (used as oracles and for
//! reporting) and tape-graph forms (used inside training steps).

use autonn::{NnError, Tape, ValueId};
use models::LatentDist;

/// KL divergence of `N(mu, exp(logvar))` from the standard normal, summed
/// over dimensions: `sum(0.5 * (-1 - logvar + mu^2 + var))`.
pub fn kl_to_standard(mu: &[f64], logvar: &[f64]) -> f64 {
    assert_eq!(mu.len(), logvar.len());
    mu.iter()
        .zip(logvar)
        .map(|(&m, &lv)| 0.5 * (-1.0 - lv + m * m + lv.exp()))
        .sum()
}

/// Symmetrized KL between two diagonal Gaussians,
/// `0.5 * (KL(P || R) + KL(R || P))`, in closed form. Zero iff the
/// distributions coincide; symmetric by construction.
pub fn latent_divergence(
    mu_p: &[f64],
    logvar_p: &[f64],
    mu_r: &[f64],
    logvar_r: &[f64],
) -> f64 {
    assert_eq!(mu_p.len(), logvar_p.len());
    assert_eq!(mu_r.len(), logvar_r.len());
    assert_eq!(mu_p.len(), mu_r.len());
    let mut acc = 0.0;
    for i in 0..mu_p.len() {
        let d = mu_p[i] - mu_r[i];
        let lp = logvar_p[i];
        let lr = logvar_r[i];
        acc += 0.25
            * ((lp - lr).exp() + (lr - lp).exp() + d * d * ((-lp).exp() + (-lr).exp()) - 2.0);
    }
    acc
}

/// Batch mean of [`kl_to_standard`] as a `[1, 1]` graph node.
pub fn kl_to_standard_mean(tape: &mut Tape, g: &LatentDist) -> Result<ValueId, NnError> {
    let sq = tape.square(g.mu);
    let var = tape.exp(g.logvar);
    let t = tape.sub(sq, g.logvar)?;
    let t = tape.add(t, var)?;
    let t = tape.add_scalar(t, -1.0);
    let t = tape.scale(t, 0.5);
    let rows = tape.sum_rows(t);
    Ok(tape.mean_all(rows))
}

/// Batch mean of [`kl_to_standard`] without the 1/2 factor, the form the
/// reasoning regularizer uses.
pub fn standard_reg_mean(tape: &mut Tape, g: &LatentDist) -> Result<ValueId, NnError> {
    let sq = tape.square(g.mu);
    let var = tape.exp(g.logvar);
    let t = tape.sub(sq, g.logvar)?;
    let t = tape.add(t, var)?;
    let t = tape.add_scalar(t, -1.0);
    let rows = tape.sum_rows(t);
    Ok(tape.mean_all(rows))
}

/// Batch mean of [`latent_divergence`] as a `[1, 1]` graph node.
pub fn latent_divergence_mean(
    tape: &mut Tape,
    p: &LatentDist,
    r: &LatentDist,
) -> Result<ValueId, NnError> {
    let d = tape.sub(p.mu, r.mu)?;
    let d2 = tape.square(d);
    let lp_minus_lr = tape.sub(p.logvar, r.logvar)?;
    let ratio_pr = tape.exp(lp_minus_lr);
    let lr_minus_lp = tape.neg(lp_minus_lr);
    let ratio_rp = tape.exp(lr_minus_lp);
    let neg_lp = tape.neg(p.logvar);
    let neg_lr = tape.neg(r.logvar);
    let prec_p = tape.exp(neg_lp);
    let prec_r = tape.exp(neg_lr);
    let prec = tape.add(prec_p, prec_r)?;
    let quad = tape.mul(d2, prec)?;
    let t = tape.add(ratio_pr, ratio_rp)?;
    let t = tape.add(t, quad)?;
    let t = tape.add_scalar(t, -2.0);
    let t = tape.scale(t, 0.25);
    let rows = tape.sum_rows(t);
    Ok(tape.mean_all(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use autonn::Tensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kl_of_the_standard_normal_is_zero() {
        assert_eq!(kl_to_standard(&[0.0; 90], &[0.0; 90]), 0.0);
    }

    #[test]
    fn kl_matches_hand_arithmetic() {
        // Unit variance, mean 1: 0.5 * (-1 - 0 + 1 + 1) = 0.5.
        assert!((kl_to_standard(&[1.0], &[0.0]) - 0.5).abs() < 1e-12);
        // Mean 0, var e: 0.5 * (-1 - 1 + 0 + e) = (e - 2) / 2.
        let expected = (std::f64::consts::E - 2.0) / 2.0;
        assert!((kl_to_standard(&[0.0], &[1.0]) - expected).abs() < 1e-12);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_only_at_the_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let mu = rng.random_range(-3.0..3.0);
            let lv = rng.random_range(-3.0..3.0);
            let kl = kl_to_standard(&[mu], &[lv]);
            assert!(kl >= 0.0);
            if mu.abs() > 1e-3 || lv.abs() > 1e-3 {
                assert!(kl > 0.0);
            }
        }
    }

    #[test]
    fn divergence_is_zero_for_identical_gaussians() {
        let mu = [0.4, -1.2, 0.0];
        let lv = [0.3, -0.5, 1.0];
        assert_eq!(latent_divergence(&mu, &lv, &mu, &lv), 0.0);
    }

    #[test]
    fn divergence_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let a: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let la: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let lb: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let fwd = latent_divergence(&a, &la, &b, &lb);
            let bwd = latent_divergence(&b, &lb, &a, &la);
            assert_eq!(fwd, bwd);
            assert!(fwd >= 0.0);
        }
    }

    #[test]
    fn unit_variance_means_zero_and_one_diverge_by_half() {
        let got = latent_divergence(&[0.0], &[0.0], &[1.0], &[0.0]);
        assert!((got - 0.5).abs() < 1e-12);
    }

    fn random_dist(
        tape: &mut Tape,
        rng: &mut ChaCha8Rng,
        batch: usize,
        dim: usize,
    ) -> (LatentDist, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mu_rows: Vec<Vec<f64>> =
            (0..batch).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let lv_rows: Vec<Vec<f64>> =
            (0..batch).map(|_| (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        let mu = Tensor::matrix(batch, dim, mu_rows.concat()).unwrap();
        let lv = Tensor::matrix(batch, dim, lv_rows.concat()).unwrap();
        let dist = LatentDist {
            mu: tape.constant(&mu).unwrap(),
            logvar: tape.constant(&lv).unwrap(),
        };
        (dist, mu_rows, lv_rows)
    }

    #[test]
    fn graph_losses_match_the_plain_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut tape = Tape::new();
        let (p, p_mu, p_lv) = random_dist(&mut tape, &mut rng, 5, 7);
        let (r, r_mu, r_lv) = random_dist(&mut tape, &mut rng, 5, 7);

        let kl = kl_to_standard_mean(&mut tape, &p).unwrap();
        let reg = standard_reg_mean(&mut tape, &p).unwrap();
        let div = latent_divergence_mean(&mut tape, &p, &r).unwrap();

        let kl_expect: f64 =
            (0..5).map(|b| kl_to_standard(&p_mu[b], &p_lv[b])).sum::<f64>() / 5.0;
        let div_expect: f64 = (0..5)
            .map(|b| latent_divergence(&p_mu[b], &p_lv[b], &r_mu[b], &r_lv[b]))
            .sum::<f64>()
            / 5.0;

        assert!((tape.scalar(kl) - kl_expect).abs() < 1e-12);
        assert!((tape.scalar(reg) - 2.0 * kl_expect).abs() < 1e-12);
        assert!((tape.scalar(div) - div_expect).abs() < 1e-12);
    }

    #[test]
    fn graph_gradients_match_finite_differences() {
        let dim = 3;
        let batch = 2;
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mu = Tensor::matrix(
            batch,
            dim,
            (0..batch * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let lv = Tensor::matrix(
            batch,
            dim,
            (0..batch * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();

        let eval = |mu_t: &Tensor, lv_t: &Tensor| -> (f64, autonn::Grads) {
            let mut tape = Tape::new();
            let dist = LatentDist {
                mu: tape.param("g", "mu", mu_t).unwrap(),
                logvar: tape.param("g", "lv", lv_t).unwrap(),
            };
            let loss = kl_to_standard_mean(&mut tape, &dist).unwrap();
            let grads = tape.backward(loss).unwrap();
            (tape.scalar(loss), grads)
        };
        let (_, grads) = eval(&mu, &lv);
        let g_mu = grads.get("g", "mu").unwrap().clone();

        let h = 1e-6;
        for i in 0..batch * dim {
            let mut plus = mu.clone();
            plus.data_mut()[i] += h;
            let mut minus = mu.clone();
            minus.data_mut()[i] -= h;
            let fd = (eval(&plus, &lv).0 - eval(&minus, &lv).0) / (2.0 * h);
            assert!((g_mu.data()[i] - fd).abs() < 1e-6);
        }
    }
}
