//! Named parameter storage and the Adam optimizer.

use std::collections::BTreeMap;

use crate::error::NnError;
use crate::tape::{Grads, Tape, ValueId};
use crate::tensor::Tensor;

/// Parameters of one model, keyed by name in deterministic order.
#[derive(Clone, Debug)]
pub struct ParamSet {
    label: String,
    values: BTreeMap<String, Tensor>,
}

impl ParamSet {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn insert(&mut self, name: impl Into<String>, t: Tensor) {
        self.values.insert(name.into(), t);
    }

    pub fn get(&self, name: &str) -> Result<&Tensor, NnError> {
        self.values.get(name).ok_or_else(|| NnError::MissingParam {
            name: format!("{}.{}", self.label, name),
        })
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor, NnError> {
        let label = self.label.clone();
        self.values.get_mut(name).ok_or(NnError::MissingParam {
            name: format!("{label}.{name}"),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of scalar values across all parameters.
    pub fn value_count(&self) -> usize {
        self.values.values().map(Tensor::len).sum()
    }

    /// Registers one parameter on a tape under this set's label.
    pub fn feed(&self, tape: &mut Tape, name: &str) -> Result<ValueId, NnError> {
        tape.param(&self.label, name, self.get(name)?)
    }
}

/// Adam with bias correction. One instance per [`ParamSet`]; the step
/// counter is shared across all parameters it updates.
#[derive(Clone, Debug)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    m: BTreeMap<String, Vec<f64>>,
    v: BTreeMap<String, Vec<f64>>,
}

impl Default for Adam {
    fn default() -> Self {
        Self::new(0.9, 0.999, 1e-8)
    }
}

impl Adam {
    pub fn new(beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            beta1,
            beta2,
            eps,
            step: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update to every parameter in the set. Refuses to touch
    /// anything if any gradient is missing or non-finite, so a poisoned
    /// backward pass cannot corrupt the model.
    pub fn step(&mut self, params: &mut ParamSet, grads: &Grads, lr: f64) -> Result<(), NnError> {
        for (name, value) in params.iter() {
            let g = grads
                .get(params.label(), name)
                .ok_or_else(|| NnError::MissingParam {
                    name: format!("{}.{}", params.label(), name),
                })?;
            if g.data().len() != value.len() {
                return Err(NnError::InvalidShape {
                    shape: g.shape().to_vec(),
                    reason: format!("gradient extent mismatch for {}.{}", params.label(), name),
                });
            }
            if !g.all_finite() {
                return Err(NnError::NonFiniteGrad {
                    param: format!("{}.{}", params.label(), name),
                });
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);

        let label = params.label().to_string();
        for (name, value) in params.values.iter_mut() {
            let g = grads.get(&label, name).expect("validated above");
            let m = self
                .m
                .entry(name.clone())
                .or_insert_with(|| vec![0.0; value.len()]);
            let v = self
                .v
                .entry(name.clone())
                .or_insert_with(|| vec![0.0; value.len()]);
            for ((p, (m_i, v_i)), &g_i) in value
                .data_mut()
                .iter_mut()
                .zip(m.iter_mut().zip(v.iter_mut()))
                .zip(g.data())
            {
                *m_i = self.beta1 * *m_i + (1.0 - self.beta1) * g_i;
                *v_i = self.beta2 * *v_i + (1.0 - self.beta2) * g_i * g_i;
                let m_hat = *m_i / bc1;
                let v_hat = *v_i / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grads_for(label: &str, name: &str, value: f64, g: f64) -> (ParamSet, Grads) {
        let mut ps = ParamSet::new(label);
        ps.insert(name, Tensor::scalar(value));
        let mut tape = Tape::new();
        let p = ps.feed(&mut tape, name).unwrap();
        let scaled = tape.scale(p, g);
        let grads = tape.backward(scaled).unwrap();
        (ps, grads)
    }

    #[test]
    fn first_step_matches_hand_computation() {
        // With g=1: m̂=1, v̂=1, so the update is exactly lr/(1+ε).
        let (mut ps, grads) = grads_for("t", "x", 0.5, 1.0);
        let mut adam = Adam::default();
        adam.step(&mut ps, &grads, 0.01).unwrap();
        let expected = 0.5 - 0.01 * 1.0 / (1.0 + 1e-8);
        assert!((ps.get("x").unwrap().data()[0] - expected).abs() < 1e-15);
        assert!(matches!(ps.get("no-such"), Err(NnError::MissingParam { .. })));
        assert_eq!(adam.steps_taken(), 1);
    }

    #[test]
    fn converges_on_quadratic() {
        // minimize (x − 3)²
        let mut ps = ParamSet::new("t");
        ps.insert("x", Tensor::scalar(-1.0));
        let mut adam = Adam::default();
        for _ in 0..2000 {
            let mut tape = Tape::new();
            let x = ps.feed(&mut tape, "x").unwrap();
            let d = tape.add_scalar(x, -3.0);
            let loss = tape.square(d);
            let grads = tape.backward(loss).unwrap();
            adam.step(&mut ps, &grads, 0.05).unwrap();
        }
        assert!((ps.get("x").unwrap().data()[0] - 3.0).abs() < 1e-3);
    }

    #[test]
    fn non_finite_gradient_leaves_params_untouched() {
        let (mut ps, grads) = grads_for("t", "x", 2.0, f64::NAN);
        let mut adam = Adam::default();
        let err = adam.step(&mut ps, &grads, 0.01).unwrap_err();
        assert!(matches!(err, NnError::NonFiniteGrad { .. }));
        assert_eq!(ps.get("x").unwrap().data()[0], 2.0);
        assert_eq!(adam.steps_taken(), 0);
    }

    #[test]
    fn missing_gradient_is_an_error() {
        let (_, grads) = grads_for("t", "x", 2.0, 1.0);
        let mut other = ParamSet::new("t");
        other.insert("y", Tensor::scalar(0.0));
        let mut adam = Adam::default();
        let err = adam.step(&mut other, &grads, 0.01).unwrap_err();
        assert!(matches!(err, NnError::MissingParam { .. }));
    }
}
