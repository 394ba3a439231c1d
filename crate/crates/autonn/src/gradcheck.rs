//! Self-check comparing reverse-mode gradients against central finite
//! differences on randomly generated graphs.
//!
//! Each case builds a small network family with its own random parameters,
//! inputs, and targets, then checks every parameter scalar. Cases are
//! constructed so no input sits near a kink of `minimum` or `clamp`, where
//! finite differences are meaningless.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::NnError;
use crate::nn::{LstmSpec, MlpSpec};
use crate::params::ParamSet;
use crate::tape::{Tape, ValueId};
use crate::tensor::Tensor;

/// Outcome of [`check_random_configs`].
#[derive(Clone, Copy, Debug)]
pub struct CheckReport {
    pub configs: usize,
    /// Total parameter scalars compared.
    pub checks: usize,
    pub max_rel_err: f64,
}

type BuildFn = Box<dyn Fn(&mut Tape, &[ParamSet]) -> Result<ValueId, NnError>>;

struct Case {
    sets: Vec<ParamSet>,
    build: BuildFn,
}

fn random_const(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Tensor {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-scale..=scale))
        .collect();
    Tensor::matrix(rows, cols, data).expect("extent matches data length")
}

fn mlp_regression(rng: &mut ChaCha8Rng) -> Case {
    let input = rng.random_range(2..=6);
    let depth = rng.random_range(0..=2);
    let hidden = (0..depth).map(|_| rng.random_range(2..=8)).collect();
    let output = rng.random_range(1..=4);
    let batch = rng.random_range(1..=4);
    let spec = MlpSpec::new(input, hidden, output);
    let params = spec.init("net0", rng);
    let x = random_const(rng, batch, input, 1.0);
    let target = random_const(rng, batch, output, 1.0);
    Case {
        sets: vec![params],
        build: Box::new(move |tape, sets| {
            let x = tape.constant(&x)?;
            let y = spec.forward(tape, &sets[0], x)?;
            let t = tape.constant(&target)?;
            let d = tape.sub(y, t)?;
            let sq = tape.square(d);
            Ok(tape.mean_all(sq))
        }),
    }
}

fn lstm_energy(rng: &mut ChaCha8Rng) -> Case {
    let input = rng.random_range(2..=5);
    let hidden = rng.random_range(2..=6);
    let batch = rng.random_range(1..=3);
    let steps = rng.random_range(1..=5);
    let spec = LstmSpec::new(input, hidden);
    let params = spec.init("net0", rng);
    let seq: Vec<Tensor> = (0..steps)
        .map(|_| random_const(rng, batch, input, 1.0))
        .collect();
    Case {
        sets: vec![params],
        build: Box::new(move |tape, sets| {
            let h = spec.forward(tape, &sets[0], &seq, batch)?;
            let sq = tape.square(h);
            Ok(tape.mean_all(sq))
        }),
    }
}

fn lstm_mlp_head(rng: &mut ChaCha8Rng) -> Case {
    let input = rng.random_range(2..=4);
    let hidden = rng.random_range(3..=6);
    let half = rng.random_range(1..=3);
    let batch = rng.random_range(1..=3);
    let steps = rng.random_range(2..=4);
    let lstm = LstmSpec::new(input, hidden);
    let mlp = MlpSpec::new(hidden, vec![rng.random_range(3..=6)], 2 * half);
    let lstm_params = lstm.init("net0", rng);
    let mlp_params = mlp.init("net1", rng);
    let seq: Vec<Tensor> = (0..steps)
        .map(|_| random_const(rng, batch, input, 1.0))
        .collect();
    let target = random_const(rng, batch, half, 1.0);
    Case {
        sets: vec![lstm_params, mlp_params],
        build: Box::new(move |tape, sets| {
            let h = lstm.forward(tape, &sets[0], &seq, batch)?;
            let out = mlp.forward(tape, &sets[1], h)?;
            let mu = tape.slice_cols(out, 0, half)?;
            let raw_var = tape.slice_cols(out, half, 2 * half)?;
            let t = tape.constant(&target)?;
            let d = tape.sub(mu, t)?;
            let sq = tape.square(d);
            let fit = tape.mean_all(sq);
            // tanh bounds the exponent so behaviour is smooth everywhere
            let bounded = tape.tanh(raw_var);
            let e = tape.exp(bounded);
            let spread = tape.mean_all(e);
            tape.add(fit, spread)
        }),
    }
}

fn elementwise_soup(rng: &mut ChaCha8Rng) -> Case {
    let n = rng.random_range(2..=6);
    let batch = rng.random_range(1..=4);
    let mut params = ParamSet::new("net0");
    params.insert("p", random_const(rng, 1, n, 1.0));
    params.insert("q", random_const(rng, 1, n, 1.0));
    let x = random_const(rng, batch, n, 1.0);
    Case {
        sets: vec![params],
        build: Box::new(move |tape, sets| {
            let x = tape.constant(&x)?;
            let p = sets[0].feed(tape, "p")?;
            let q = sets[0].feed(tape, "q")?;
            let a = tape.add_row(x, p)?;
            let b = tape.mul_row(x, q)?;
            let u = tape.sigmoid(a); // (0, 1)
            let v0 = tape.sigmoid(b);
            let v = tape.add_scalar(v0, 1.5); // (1.5, 2.5): gap keeps minimum away from ties
            let lo = tape.minimum(u, v)?;
            let u_hi = tape.add_scalar(u, 3.0);
            let hi = tape.minimum(u_hi, v)?;
            let ratio = tape.div(lo, v)?;
            let rows = tape.sum_rows(ratio);
            let rows_sq = tape.square(rows);
            let part1 = tape.mean_all(rows_sq);
            let part2 = tape.mean_all(hi);
            // always saturated: input sits in (4.5, 5.5), far above the bound
            let sat_in = tape.add_scalar(u, 4.5);
            let sat = tape.clamp(sat_in, 0.0, 3.0);
            let part3 = tape.mean_all(sat);
            let neg = tape.neg(part2);
            let s = tape.sub(part1, neg)?;
            let s = tape.add(s, part3)?;
            Ok(tape.scale(s, 0.5))
        }),
    }
}

fn gaussian_head(rng: &mut ChaCha8Rng) -> Case {
    let input = rng.random_range(2..=5);
    let batch = rng.random_range(1..=4);
    let act = 2;
    let mlp = MlpSpec::new(input, vec![rng.random_range(3..=6)], act);
    let mut params = mlp.init("net0", rng);
    params.insert("log_std", random_const(rng, 1, act, 0.5));
    let x = random_const(rng, batch, input, 1.0);
    let actions = random_const(rng, batch, act, 1.0);
    Case {
        sets: vec![params],
        build: Box::new(move |tape, sets| {
            let x = tape.constant(&x)?;
            let mu = mlp.forward(tape, &sets[0], x)?;
            let log_std = sets[0].feed(tape, "log_std")?;
            let a = tape.constant(&actions)?;
            let d = tape.sub(a, mu)?;
            let sq = tape.square(d);
            let neg2ls = tape.scale(log_std, -2.0);
            let inv_var = tape.exp(neg2ls);
            let scaled = tape.mul_row(sq, inv_var)?;
            let two_ls = tape.scale(log_std, 2.0);
            let with_norm = tape.add_row(scaled, two_ls)?;
            let per_row = tape.sum_rows(with_norm);
            Ok(tape.mean_all(per_row))
        }),
    }
}

fn make_case(index: usize, seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    match index % 5 {
        0 => mlp_regression(&mut rng),
        1 => lstm_energy(&mut rng),
        2 => lstm_mlp_head(&mut rng),
        3 => elementwise_soup(&mut rng),
        _ => gaussian_head(&mut rng),
    }
}

fn eval_loss(case: &Case, sets: &[ParamSet]) -> Result<f64, NnError> {
    let mut tape = Tape::new();
    let loss = (case.build)(&mut tape, sets)?;
    Ok(tape.scalar(loss))
}

/// Checks `configs` random graphs with step `h`, returning the worst
/// relative error seen. The relative error uses a magnitude floor of 1 so
/// near-zero gradients are compared absolutely.
pub fn check_random_configs(configs: usize, h: f64, seed: u64) -> Result<CheckReport, NnError> {
    let mut checks = 0usize;
    let mut max_rel_err: f64 = 0.0;
    for idx in 0..configs {
        let case = make_case(idx, seed);

        let mut tape = Tape::new();
        let loss = (case.build)(&mut tape, &case.sets)?;
        let grads = tape.backward(loss)?;

        for (si, set) in case.sets.iter().enumerate() {
            for (name, tensor) in set.iter() {
                let g = grads
                    .get(set.label(), name)
                    .ok_or_else(|| NnError::MissingParam {
                        name: format!("{}.{name}", set.label()),
                    })?;
                for i in 0..tensor.len() {
                    let mut plus = case.sets.clone();
                    plus[si].get_mut(name)?.data_mut()[i] += h;
                    let f_plus = eval_loss(&case, &plus)?;
                    let mut minus = case.sets.clone();
                    minus[si].get_mut(name)?.data_mut()[i] -= h;
                    let f_minus = eval_loss(&case, &minus)?;
                    let fd = (f_plus - f_minus) / (2.0 * h);
                    let ad = g.data()[i];
                    let denom = fd.abs().max(ad.abs()).max(1.0);
                    let rel = (fd - ad).abs() / denom;
                    if rel > max_rel_err {
                        max_rel_err = rel;
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(CheckReport {
        configs,
        checks,
        max_rel_err,
    })
}
