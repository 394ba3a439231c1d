//! Gradient correctness against central finite differences.

use autonn::gradcheck::check_random_configs;
use autonn::{LstmSpec, MlpSpec, Tape, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fifty_random_configs_match_finite_differences() {
    let start = std::time::Instant::now();
    let report = check_random_configs(50, 1e-5, 0xA11CE).expect("gradcheck runs");
    let elapsed = start.elapsed();
    assert_eq!(report.configs, 50);
    assert!(report.checks > 1_000, "too few scalars checked: {}", report.checks);
    assert!(
        report.max_rel_err < 1e-4,
        "worst relative error {} exceeds 1e-4",
        report.max_rel_err
    );
    assert!(elapsed.as_secs() < 60, "gradcheck took {elapsed:?}");
}

#[test]
fn gradients_are_deterministic_across_reruns() {
    let run = || {
        let spec = MlpSpec::new(6, vec![8], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let params = spec.init("net", &mut rng);
        let lstm = LstmSpec::new(3, 5);
        let lstm_params = lstm.init("rec", &mut rng);

        let mut tape = Tape::new();
        let seq: Vec<Tensor> = (0..4)
            .map(|t| Tensor::matrix(2, 3, vec![0.1 * (t as f64 + 1.0); 6]).unwrap())
            .collect();
        let h = lstm.forward(&mut tape, &lstm_params, &seq, 2).unwrap();
        let sq = tape.square(h);
        let loss_rec = tape.mean_all(sq);
        let x = tape.constant_raw(2, 6, vec![0.25; 12]);
        let y = spec.forward(&mut tape, &params, x).unwrap();
        let ysq = tape.square(y);
        let loss_mlp = tape.mean_all(ysq);
        let loss = tape.add(loss_rec, loss_mlp).unwrap();
        let grads = tape.backward(loss).unwrap();
        let mut bits = Vec::new();
        for set in [&params, &lstm_params] {
            for (name, _) in set.iter() {
                for v in grads.get(set.label(), name).unwrap().data() {
                    bits.push(v.to_bits());
                }
            }
        }
        bits
    };
    assert_eq!(run(), run());
}

#[test]
fn forward_stays_finite_on_large_inputs() {
    let spec = MlpSpec::new(4, vec![16, 16], 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = spec.init("net", &mut rng);
    let mut tape = Tape::new();
    let x = tape.constant_raw(3, 4, vec![1e6, -1e6, 1e3, -1e3, 0.0, 1e6, -1.0, 2.0, 50.0, -50.0, 9.0, -9.0]);
    let y = spec.forward(&mut tape, &params, x).unwrap();
    assert!(tape.value(y).iter().all(|v| v.is_finite()));
}
