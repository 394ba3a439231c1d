//! Rolling history windows feeding the recurrent encoders.

use std::collections::VecDeque;

/// Last `len` observations, oldest first. Until `len` observations have
/// arrived, the window is padded by repeating the earliest one, so a fresh
/// episode presents a constant history rather than zeros that resemble a
/// wall at point-blank range.
#[derive(Clone, Debug)]
pub struct ObsWindow {
    len: usize,
    dim: usize,
    rows: VecDeque<Vec<f64>>,
}

impl ObsWindow {
    pub fn new(len: usize, dim: usize) -> Self {
        assert!(len > 0 && dim > 0);
        Self {
            len,
            dim,
            rows: VecDeque::with_capacity(len),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim);
        if self.rows.is_empty() {
            for _ in 0..self.len {
                self.rows.push_back(row.to_vec());
            }
        } else {
            self.rows.pop_front();
            self.rows.push_back(row.to_vec());
        }
    }

    /// True once at least one observation has been pushed.
    pub fn is_primed(&self) -> bool {
        !self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row `t` of the window, oldest first. Panics before the first push.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.rows[t]
    }

    pub fn reset(&mut self) {
        self.rows.clear();
    }
}

/// Last `len - 1` executed actions, zero-padded at the front; the final
/// window row is supplied per query as the action currently under
/// consideration.
#[derive(Clone, Debug)]
pub struct ActWindow {
    len: usize,
    dim: usize,
    rows: VecDeque<Vec<f64>>,
}

impl ActWindow {
    pub fn new(len: usize, dim: usize) -> Self {
        assert!(len > 1 && dim > 0);
        let mut rows = VecDeque::with_capacity(len - 1);
        for _ in 0..len - 1 {
            rows.push_back(vec![0.0; dim]);
        }
        Self { len, dim, rows }
    }

    /// Records an executed action.
    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.dim);
        self.rows.pop_front();
        self.rows.push_back(row.to_vec());
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Window row `t`: history for `t < len - 1`, `pending` for the last.
    pub fn row_with<'a>(&'a self, t: usize, pending: &'a [f64]) -> &'a [f64] {
        assert_eq!(pending.len(), self.dim);
        if t + 1 == self.len {
            pending
        } else {
            &self.rows[t]
        }
    }

    pub fn reset(&mut self) {
        for row in &mut self.rows {
            row.fill(0.0);
        }
    }
}
