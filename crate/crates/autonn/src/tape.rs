//! Define-by-run computation graph with reverse-mode gradients.
//!
//! A [`Tape`] records every primitive applied during a forward pass. Values
//! are 2-D matrices of f64 (scalars are 1×1, vectors 1×n). Calling
//! [`Tape::backward`] on a scalar node walks the record in reverse and
//! returns exact gradients for every registered parameter leaf, including
//! zeros for parameters that never reached the loss.

use std::collections::HashMap;

use crate::error::NnError;
use crate::tensor::{matmul_acc, transpose, Tensor};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ValueId(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param,
    Matmul(ValueId, ValueId),
    Add(ValueId, ValueId),
    Sub(ValueId, ValueId),
    Mul(ValueId, ValueId),
    Div(ValueId, ValueId),
    /// a[m,n] + row[1,n] broadcast over rows
    AddRow(ValueId, ValueId),
    /// a[m,n] * row[1,n] broadcast over rows
    MulRow(ValueId, ValueId),
    Scale(ValueId, f64),
    AddScalar(ValueId),
    Neg(ValueId),
    Tanh(ValueId),
    Sigmoid(ValueId),
    Exp(ValueId),
    Square(ValueId),
    SumAll(ValueId),
    MeanAll(ValueId),
    /// [m,n] -> [m,1] per-row sums
    SumRows(ValueId),
    SliceCols(ValueId, usize),
    SliceRows(ValueId, usize),
    Minimum(ValueId, ValueId),
    Clamp(ValueId, f64, f64),
}

struct Node {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    op: Op,
}

struct ParamLeaf {
    label: String,
    name: String,
    id: ValueId,
}

/// Recorded forward pass.
pub struct Tape {
    nodes: Vec<Node>,
    params: Vec<ParamLeaf>,
    param_index: HashMap<(String, String), ValueId>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            params: Vec::new(),
            param_index: HashMap::new(),
        }
    }

    fn push(&mut self, rows: usize, cols: usize, data: Vec<f64>, op: Op) -> ValueId {
        debug_assert_eq!(data.len(), rows * cols);
        self.nodes.push(Node {
            rows,
            cols,
            data,
            op,
        });
        ValueId(self.nodes.len() - 1)
    }

    fn dims(&self, id: ValueId) -> (usize, usize) {
        let n = &self.nodes[id.0];
        (n.rows, n.cols)
    }

    pub fn shape(&self, id: ValueId) -> (usize, usize) {
        self.dims(id)
    }

    pub fn value(&self, id: ValueId) -> &[f64] {
        &self.nodes[id.0].data
    }

    pub fn value_tensor(&self, id: ValueId) -> Tensor {
        let n = &self.nodes[id.0];
        Tensor::matrix(n.rows, n.cols, n.data.clone()).expect("node shape is consistent")
    }

    /// Scalar value of a 1×1 node.
    pub fn scalar(&self, id: ValueId) -> f64 {
        debug_assert_eq!(self.dims(id), (1, 1));
        self.nodes[id.0].data[0]
    }

    pub fn constant(&mut self, t: &Tensor) -> Result<ValueId, NnError> {
        let (r, c) = t.dims2()?;
        Ok(self.push(r, c, t.data().to_vec(), Op::Constant))
    }

    pub fn constant_raw(&mut self, rows: usize, cols: usize, data: Vec<f64>) -> ValueId {
        self.push(rows, cols, data, Op::Constant)
    }

    /// Registers a parameter leaf. Repeated calls for the same
    /// `(label, name)` return the same node so gradients accumulate across
    /// every use in the pass.
    pub fn param(&mut self, label: &str, name: &str, t: &Tensor) -> Result<ValueId, NnError> {
        let key = (label.to_string(), name.to_string());
        if let Some(&id) = self.param_index.get(&key) {
            return Ok(id);
        }
        let (r, c) = t.dims2()?;
        let id = self.push(r, c, t.data().to_vec(), Op::Param);
        self.param_index.insert(key, id);
        self.params.push(ParamLeaf {
            label: label.to_string(),
            name: name.to_string(),
            id,
        });
        Ok(id)
    }

    fn binary_same_shape(
        &mut self,
        opname: &'static str,
        a: ValueId,
        b: ValueId,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<ValueId, NnError> {
        let (ar, ac) = self.dims(a);
        let (br, bc) = self.dims(b);
        if (ar, ac) != (br, bc) {
            return Err(NnError::ShapeMismatch {
                op: opname,
                left: (ar, ac),
                right: (br, bc),
            });
        }
        let data: Vec<f64> = self.nodes[a.0]
            .data
            .iter()
            .zip(&self.nodes[b.0].data)
            .map(|(&x, &y)| f(x, y))
            .collect();
        Ok(self.push(ar, ac, data, op))
    }

    pub fn matmul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NnError> {
        let (m, ka) = self.dims(a);
        let (kb, n) = self.dims(b);
        if ka != kb {
            return Err(NnError::ShapeMismatch {
                op: "matmul",
                left: (m, ka),
                right: (kb, n),
            });
        }
        let mut out = vec![0.0; m * n];
        matmul_acc(
            &self.nodes[a.0].data,
            &self.nodes[b.0].data,
            m,
            ka,
            n,
            &mut out,
        );
        Ok(self.push(m, n, out, Op::Matmul(a, b)))
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NnError> {
        self.binary_same_shape("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NnError> {
        self.binary_same_shape("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NnError> {
        self.binary_same_shape("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NnError> {
        self.binary_same_shape("div", a, b, |x, y| x / y, Op::Div(a, b))
    }

    pub fn minimum(&mut self, a: ValueId, b: ValueId) -> Result<ValueId, NnError> {
        self.binary_same_shape("minimum", a, b, f64::min, Op::Minimum(a, b))
    }

    fn row_broadcast(
        &mut self,
        opname: &'static str,
        a: ValueId,
        row: ValueId,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<ValueId, NnError> {
        let (m, n) = self.dims(a);
        let (rr, rc) = self.dims(row);
        if rr != 1 || rc != n {
            return Err(NnError::ShapeMismatch {
                op: opname,
                left: (m, n),
                right: (rr, rc),
            });
        }
        let rowdata = &self.nodes[row.0].data;
        let mut out = Vec::with_capacity(m * n);
        for i in 0..m {
            let arow = &self.nodes[a.0].data[i * n..(i + 1) * n];
            out.extend(arow.iter().zip(rowdata).map(|(&x, &y)| f(x, y)));
        }
        Ok(self.push(m, n, out, op))
    }

    pub fn add_row(&mut self, a: ValueId, row: ValueId) -> Result<ValueId, NnError> {
        self.row_broadcast("add_row", a, row, |x, y| x + y, Op::AddRow(a, row))
    }

    pub fn mul_row(&mut self, a: ValueId, row: ValueId) -> Result<ValueId, NnError> {
        self.row_broadcast("mul_row", a, row, |x, y| x * y, Op::MulRow(a, row))
    }

    fn unary(&mut self, a: ValueId, f: impl Fn(f64) -> f64, op: Op) -> ValueId {
        let (r, c) = self.dims(a);
        let data: Vec<f64> = self.nodes[a.0].data.iter().map(|&x| f(x)).collect();
        self.push(r, c, data, op)
    }

    pub fn scale(&mut self, a: ValueId, k: f64) -> ValueId {
        self.unary(a, |x| x * k, Op::Scale(a, k))
    }

    pub fn add_scalar(&mut self, a: ValueId, k: f64) -> ValueId {
        self.unary(a, |x| x + k, Op::AddScalar(a))
    }

    pub fn neg(&mut self, a: ValueId) -> ValueId {
        self.unary(a, |x| -x, Op::Neg(a))
    }

    pub fn tanh(&mut self, a: ValueId) -> ValueId {
        self.unary(a, f64::tanh, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: ValueId) -> ValueId {
        self.unary(a, sigmoid, Op::Sigmoid(a))
    }

    pub fn exp(&mut self, a: ValueId) -> ValueId {
        self.unary(a, f64::exp, Op::Exp(a))
    }

    pub fn square(&mut self, a: ValueId) -> ValueId {
        self.unary(a, |x| x * x, Op::Square(a))
    }

    pub fn clamp(&mut self, a: ValueId, lo: f64, hi: f64) -> ValueId {
        self.unary(a, |x| x.clamp(lo, hi), Op::Clamp(a, lo, hi))
    }

    pub fn sum_all(&mut self, a: ValueId) -> ValueId {
        let s: f64 = self.nodes[a.0].data.iter().sum();
        self.push(1, 1, vec![s], Op::SumAll(a))
    }

    pub fn mean_all(&mut self, a: ValueId) -> ValueId {
        let len = self.nodes[a.0].data.len();
        let s: f64 = self.nodes[a.0].data.iter().sum();
        self.push(1, 1, vec![s / len as f64], Op::MeanAll(a))
    }

    pub fn sum_rows(&mut self, a: ValueId) -> ValueId {
        let (m, n) = self.dims(a);
        let data: Vec<f64> = (0..m)
            .map(|i| self.nodes[a.0].data[i * n..(i + 1) * n].iter().sum())
            .collect();
        self.push(m, 1, data, Op::SumRows(a))
    }

    pub fn slice_cols(&mut self, a: ValueId, lo: usize, hi: usize) -> Result<ValueId, NnError> {
        let (m, n) = self.dims(a);
        if lo >= hi || hi > n {
            return Err(NnError::ShapeMismatch {
                op: "slice_cols",
                left: (m, n),
                right: (lo, hi),
            });
        }
        let w = hi - lo;
        let mut out = Vec::with_capacity(m * w);
        for i in 0..m {
            out.extend_from_slice(&self.nodes[a.0].data[i * n + lo..i * n + hi]);
        }
        Ok(self.push(m, w, out, Op::SliceCols(a, lo)))
    }

    pub fn slice_rows(&mut self, a: ValueId, lo: usize, hi: usize) -> Result<ValueId, NnError> {
        let (m, n) = self.dims(a);
        if lo >= hi || hi > m {
            return Err(NnError::ShapeMismatch {
                op: "slice_rows",
                left: (m, n),
                right: (lo, hi),
            });
        }
        let out = self.nodes[a.0].data[lo * n..hi * n].to_vec();
        Ok(self.push(hi - lo, n, out, Op::SliceRows(a, lo)))
    }

    /// Reverse pass from a scalar loss. Returns gradients for every
    /// registered parameter; parameters with no path to the loss get zeros.
    pub fn backward(&self, loss: ValueId) -> Result<Grads, NnError> {
        let (lr, lc) = self.dims(loss);
        if (lr, lc) != (1, 1) {
            return Err(NnError::NotScalar((lr, lc)));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            match node.op {
                Op::Constant | Op::Param => {
                    // leaves: keep the gradient for harvesting below
                    grads[idx] = Some(g);
                    continue;
                }
                Op::Matmul(a, b) => {
                    let (m, k) = self.dims(a);
                    let (_, n) = self.dims(b);
                    if self.wants_grad(a) {
                        // dA = dC · Bᵀ
                        let bt = transpose(&self.nodes[b.0].data, k, n);
                        let ga = self.grad_slot(&mut grads, a);
                        matmul_acc(&g, &bt, m, n, k, ga);
                    }
                    if self.wants_grad(b) {
                        // dB = Aᵀ · dC
                        let at = transpose(&self.nodes[a.0].data, m, k);
                        let gb = self.grad_slot(&mut grads, b);
                        matmul_acc(&at, &g, k, m, n, gb);
                    }
                }
                Op::Add(a, b) => {
                    self.accumulate(&mut grads, a, |i| g[i]);
                    self.accumulate(&mut grads, b, |i| g[i]);
                }
                Op::Sub(a, b) => {
                    self.accumulate(&mut grads, a, |i| g[i]);
                    self.accumulate(&mut grads, b, |i| -g[i]);
                }
                Op::Mul(a, b) => {
                    let bd = &self.nodes[b.0].data;
                    let ad = &self.nodes[a.0].data;
                    self.accumulate(&mut grads, a, |i| g[i] * bd[i]);
                    self.accumulate(&mut grads, b, |i| g[i] * ad[i]);
                }
                Op::Div(a, b) => {
                    let ad = &self.nodes[a.0].data;
                    let bd = &self.nodes[b.0].data;
                    self.accumulate(&mut grads, a, |i| g[i] / bd[i]);
                    self.accumulate(&mut grads, b, |i| -g[i] * ad[i] / (bd[i] * bd[i]));
                }
                Op::AddRow(a, row) => {
                    self.accumulate(&mut grads, a, |i| g[i]);
                    if self.wants_grad(row) {
                        let (m, n) = self.dims(a);
                        let gr = self.grad_slot(&mut grads, row);
                        for i in 0..m {
                            for j in 0..n {
                                gr[j] += g[i * n + j];
                            }
                        }
                    }
                }
                Op::MulRow(a, row) => {
                    let (m, n) = self.dims(a);
                    if self.wants_grad(a) {
                        let rowd = self.nodes[row.0].data.clone();
                        self.accumulate(&mut grads, a, |i| g[i] * rowd[i % n]);
                    }
                    if self.wants_grad(row) {
                        let ad = &self.nodes[a.0].data;
                        let gr = self.grad_slot(&mut grads, row);
                        for i in 0..m {
                            for j in 0..n {
                                gr[j] += g[i * n + j] * ad[i * n + j];
                            }
                        }
                    }
                }
                Op::Scale(a, k) => self.accumulate(&mut grads, a, |i| g[i] * k),
                Op::AddScalar(a) => self.accumulate(&mut grads, a, |i| g[i]),
                Op::Neg(a) => self.accumulate(&mut grads, a, |i| -g[i]),
                Op::Tanh(a) => {
                    let y = &node.data;
                    self.accumulate(&mut grads, a, |i| g[i] * (1.0 - y[i] * y[i]));
                }
                Op::Sigmoid(a) => {
                    let y = &node.data;
                    self.accumulate(&mut grads, a, |i| g[i] * y[i] * (1.0 - y[i]));
                }
                Op::Exp(a) => {
                    let y = &node.data;
                    self.accumulate(&mut grads, a, |i| g[i] * y[i]);
                }
                Op::Square(a) => {
                    let x = &self.nodes[a.0].data;
                    self.accumulate(&mut grads, a, |i| 2.0 * g[i] * x[i]);
                }
                Op::SumAll(a) => {
                    let gv = g[0];
                    self.accumulate(&mut grads, a, |_| gv);
                }
                Op::MeanAll(a) => {
                    let gv = g[0] / self.nodes[a.0].data.len() as f64;
                    self.accumulate(&mut grads, a, |_| gv);
                }
                Op::SumRows(a) => {
                    let (_, n) = self.dims(a);
                    self.accumulate(&mut grads, a, |i| g[i / n]);
                }
                Op::SliceCols(a, lo) => {
                    if self.wants_grad(a) {
                        let (_, n) = self.dims(a);
                        let w = node.cols;
                        let rows = node.rows;
                        let ga = self.grad_slot(&mut grads, a);
                        for i in 0..rows {
                            for j in 0..w {
                                ga[i * n + lo + j] += g[i * w + j];
                            }
                        }
                    }
                }
                Op::SliceRows(a, lo) => {
                    if self.wants_grad(a) {
                        let (_, n) = self.dims(a);
                        let ga = self.grad_slot(&mut grads, a);
                        for (off, &gv) in g.iter().enumerate() {
                            ga[lo * n + off] += gv;
                        }
                    }
                }
                Op::Minimum(a, b) => {
                    let ad = &self.nodes[a.0].data;
                    let bd = &self.nodes[b.0].data;
                    self.accumulate(&mut grads, a, |i| if ad[i] <= bd[i] { g[i] } else { 0.0 });
                    self.accumulate(&mut grads, b, |i| if ad[i] <= bd[i] { 0.0 } else { g[i] });
                }
                Op::Clamp(a, lo, hi) => {
                    let x = &self.nodes[a.0].data;
                    self.accumulate(&mut grads, a, |i| {
                        if x[i] >= lo && x[i] <= hi {
                            g[i]
                        } else {
                            0.0
                        }
                    });
                }
            }
        }

        let mut out = HashMap::new();
        for leaf in &self.params {
            let (r, c) = self.dims(leaf.id);
            let data = grads[leaf.id.0]
                .take()
                .unwrap_or_else(|| vec![0.0; r * c]);
            let t = Tensor::matrix(r, c, data).expect("leaf shape is consistent");
            out.insert((leaf.label.clone(), leaf.name.clone()), t);
        }
        Ok(Grads { map: out })
    }

    /// Gradients are only materialized for nodes that can flow to a leaf
    /// that needs them; plain constants are skipped to save memory.
    fn wants_grad(&self, id: ValueId) -> bool {
        !matches!(self.nodes[id.0].op, Op::Constant)
    }

    fn grad_slot<'g>(&self, grads: &'g mut [Option<Vec<f64>>], id: ValueId) -> &'g mut Vec<f64> {
        let (r, c) = self.dims(id);
        grads[id.0].get_or_insert_with(|| vec![0.0; r * c])
    }

    fn accumulate(
        &self,
        grads: &mut [Option<Vec<f64>>],
        id: ValueId,
        contrib: impl Fn(usize) -> f64,
    ) {
        if !self.wants_grad(id) {
            return;
        }
        let slot = self.grad_slot(grads, id);
        for (i, s) in slot.iter_mut().enumerate() {
            *s += contrib(i);
        }
    }
}

/// Per-parameter gradients produced by [`Tape::backward`].
pub struct Grads {
    map: HashMap<(String, String), Tensor>,
}

impl Grads {
    pub fn get(&self, label: &str, name: &str) -> Option<&Tensor> {
        self.map.get(&(label.to_string(), name.to_string()))
    }

    /// All gradients belonging to one parameter set, keyed by parameter
    /// name, in deterministic order.
    pub fn for_label(&self, label: &str) -> std::collections::BTreeMap<String, Tensor> {
        self.map
            .iter()
            .filter(|((l, _), _)| l == label)
            .map(|((_, n), t)| (n.clone(), t.clone()))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_gradient() {
        // loss = x·x at x=3 → d/dx = 6
        let mut tape = Tape::new();
        let x = tape
            .param("t", "x", &Tensor::scalar(3.0))
            .unwrap();
        let y = tape.mul(x, x).unwrap();
        let grads = tape.backward(y).unwrap();
        assert_eq!(grads.get("t", "x").unwrap().data(), &[6.0]);
    }

    #[test]
    fn disconnected_param_gets_zero_grad() {
        let mut tape = Tape::new();
        let x = tape.param("t", "x", &Tensor::scalar(2.0)).unwrap();
        let _unused = tape.param("t", "p", &Tensor::row(vec![1.0, 2.0])).unwrap();
        let y = tape.square(x);
        let grads = tape.backward(y).unwrap();
        assert_eq!(grads.get("t", "p").unwrap().data(), &[0.0, 0.0]);
        assert_eq!(grads.get("t", "x").unwrap().data(), &[4.0]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let x = tape.param("t", "x", &Tensor::row(vec![1.0, 2.0])).unwrap();
        let y = tape.tanh(x);
        assert!(matches!(tape.backward(y), Err(NnError::NotScalar(_))));
    }

    #[test]
    fn shared_param_accumulates() {
        // loss = x·x + 3x → d/dx = 2x + 3 = 7 at x=2
        let mut tape = Tape::new();
        let x = tape.param("t", "x", &Tensor::scalar(2.0)).unwrap();
        let x_again = tape.param("t", "x", &Tensor::scalar(2.0)).unwrap();
        assert_eq!(x, x_again);
        let sq = tape.mul(x, x).unwrap();
        let lin = tape.scale(x, 3.0);
        let loss = tape.add(sq, lin).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get("t", "x").unwrap().data(), &[7.0]);
    }

    #[test]
    fn matmul_shape_error() {
        let mut tape = Tape::new();
        let a = tape.constant_raw(2, 3, vec![0.0; 6]);
        let b = tape.constant_raw(2, 2, vec![0.0; 4]);
        assert!(matches!(
            tape.matmul(a, b),
            Err(NnError::ShapeMismatch { op: "matmul", .. })
        ));
    }

    #[test]
    fn minimum_and_clamp_subgradients() {
        let mut tape = Tape::new();
        let a = tape.param("t", "a", &Tensor::row(vec![1.0, 5.0])).unwrap();
        let b = tape.constant_raw(1, 2, vec![2.0, 2.0]);
        let m = tape.minimum(a, b).unwrap();
        let s = tape.sum_all(m);
        let grads = tape.backward(s).unwrap();
        // a[0]=1 < 2 → grad 1; a[1]=5 > 2 → grad 0
        assert_eq!(grads.get("t", "a").unwrap().data(), &[1.0, 0.0]);

        let mut tape = Tape::new();
        let a = tape
            .param("t", "a", &Tensor::row(vec![0.5, 3.0, -1.0]))
            .unwrap();
        let c = tape.clamp(a, 0.0, 1.0);
        let s = tape.sum_all(c);
        let grads = tape.backward(s).unwrap();
        assert_eq!(grads.get("t", "a").unwrap().data(), &[1.0, 0.0, 0.0]);
    }
}
