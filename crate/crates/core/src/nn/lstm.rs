//! Forget-gate LSTM layer with exact backpropagation through time.
//!
//! Gate blocks are stacked in the fixed order `[input, forget, cell, output]`
//! along the rows of a single `4H × (I + H)` weight matrix whose columns are
//! `[x_t ; h_{t-1}]`:
//!
//! ```text
//! z_t = W [x_t ; h_{t-1}] + b
//! i = σ(z_i)   f = σ(z_f)   g = tanh(z_g)   o = σ(z_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```
//!
//! No peepholes, no projection.

use rand::Rng;

use super::matrix::{axpy, dot, Matrix};
use crate::error::{ensure_dims, Error, Result};

/// Gate block index within the stacked weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Cell = 2,
    Output = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `4H × (I + H)`.
    pub gate_weights: Matrix,
    /// `4H`.
    pub gate_bias: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self {
            gate_weights: Matrix::zeros(4 * hidden_size, input_size + hidden_size),
            gate_bias: vec![0.0; 4 * hidden_size],
        }
    }

    /// Weights ~ U(-1/sqrt(I+H), 1/sqrt(I+H)); biases zero except the forget
    /// block, which starts at `1.0`.
    pub fn init<R: Rng + ?Sized>(input_size: usize, hidden_size: usize, rng: &mut R) -> Self {
        let fan_in = input_size + hidden_size;
        let bound = 1.0 / (fan_in as f64).sqrt();
        let gate_weights =
            Matrix::from_fn(4 * hidden_size, fan_in, |_, _| rng.random_range(-bound..bound));
        let mut p = Self {
            gate_weights,
            gate_bias: vec![0.0; 4 * hidden_size],
        };
        p.gate_bias_mut(Gate::Forget).fill(1.0);
        p
    }

    pub fn input_size(&self) -> usize {
        self.gate_weights.cols() - self.hidden_size()
    }

    pub fn hidden_size(&self) -> usize {
        self.gate_bias.len() / 4
    }

    pub fn param_count(&self) -> usize {
        self.gate_weights.len() + self.gate_bias.len()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_size(), self.hidden_size())
    }

    pub fn gate_bias_mut(&mut self, gate: Gate) -> &mut [f64] {
        let h = self.hidden_size();
        let g = gate as usize;
        &mut self.gate_bias[g * h..(g + 1) * h]
    }

    fn fingerprint(&self) -> u64 {
        // FNV-1a over the raw parameter bits
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |v: u64| {
            hash ^= v;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        };
        feed(self.gate_weights.rows() as u64);
        feed(self.gate_weights.cols() as u64);
        for v in self.gate_weights.data().iter().chain(&self.gate_bias) {
            feed(v.to_bits());
        }
        hash
    }
}

/// Activations retained by [`lstm_forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache {
    seq: Matrix,
    h0: Vec<f64>,
    c0: Vec<f64>,
    /// Post-activation gates, `T × 4H`.
    gates: Matrix,
    cells: Matrix,
    tanh_cells: Matrix,
    hidden: Matrix,
    fingerprint: u64,
}

/// Gradients w.r.t. the inputs of an LSTM call.
#[derive(Debug, Clone)]
pub struct LstmInputGrads {
    pub seq: Matrix,
    pub h0: Vec<f64>,
    pub c0: Vec<f64>,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Runs the layer over `seq` (`T × I`), returning the hidden state after
/// every step (`T × H`).
pub fn lstm_forward(
    params: &LstmParams,
    seq: &Matrix,
    h0: &[f64],
    c0: &[f64],
) -> Result<(Matrix, LstmCache)> {
    let hs = params.hidden_size();
    let is = params.input_size();
    ensure_dims!(
        seq.cols() == is,
        "lstm expects {is} input features, sequence has {}",
        seq.cols()
    );
    ensure_dims!(
        h0.len() == hs && c0.len() == hs,
        "lstm initial state must have length {hs} (got h0={}, c0={})",
        h0.len(),
        c0.len()
    );
    let steps = seq.rows();
    let mut gates = Matrix::zeros(steps, 4 * hs);
    let mut cells = Matrix::zeros(steps, hs);
    let mut tanh_cells = Matrix::zeros(steps, hs);
    let mut hidden = Matrix::zeros(steps, hs);
    let mut xh = vec![0.0; is + hs];
    xh[is..].copy_from_slice(h0);
    let mut c_prev = c0.to_vec();

    for t in 0..steps {
        xh[..is].copy_from_slice(seq.row(t));
        let z = gates.row_mut(t);
        for (r, zr) in z.iter_mut().enumerate() {
            *zr = params.gate_bias[r] + dot(params.gate_weights.row(r), &xh);
        }
        for v in &mut z[..2 * hs] {
            *v = sigmoid(*v);
        }
        for v in &mut z[2 * hs..3 * hs] {
            *v = v.tanh();
        }
        for v in &mut z[3 * hs..] {
            *v = sigmoid(*v);
        }
        let z = gates.row(t);
        let (c_row, tc_row, h_row) = (cells.row_mut(t), tanh_cells.row_mut(t), hidden.row_mut(t));
        for k in 0..hs {
            let (i, f, g, o) = (z[k], z[hs + k], z[2 * hs + k], z[3 * hs + k]);
            let c = f * c_prev[k] + i * g;
            let tc = c.tanh();
            c_row[k] = c;
            tc_row[k] = tc;
            h_row[k] = o * tc;
        }
        c_prev.copy_from_slice(cells.row(t));
        xh[is..].copy_from_slice(hidden.row(t));
    }

    let out = hidden.clone();
    Ok((
        out,
        LstmCache {
            seq: seq.clone(),
            h0: h0.to_vec(),
            c0: c0.to_vec(),
            gates,
            cells,
            tanh_cells,
            hidden,
            fingerprint: params.fingerprint(),
        },
    ))
}

/// Backpropagation through time. Parameter gradients are accumulated into
/// `grads`; input and initial-state gradients are returned.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmCache,
    grad_out: &Matrix,
    grads: &mut LstmParams,
) -> Result<LstmInputGrads> {
    if cache.fingerprint != params.fingerprint() {
        return Err(Error::Usage(
            "lstm cache was produced with different parameters".into(),
        ));
    }
    let hs = params.hidden_size();
    let is = params.input_size();
    let steps = cache.seq.rows();
    ensure_dims!(
        grad_out.shape() == (steps, hs),
        "lstm backward: expected gradient {:?}, got {:?}",
        (steps, hs),
        grad_out.shape()
    );
    ensure_dims!(
        grads.gate_weights.shape() == params.gate_weights.shape(),
        "lstm backward: gradient buffer shape mismatch"
    );

    let mut grad_seq = Matrix::zeros(steps, is);
    let mut dh_next = vec![0.0; hs];
    let mut dc_next = vec![0.0; hs];
    let mut dz = vec![0.0; 4 * hs];
    let mut xh = vec![0.0; is + hs];
    let mut dxh = vec![0.0; is + hs];

    for t in (0..steps).rev() {
        let z = cache.gates.row(t);
        let tc = cache.tanh_cells.row(t);
        let c_prev = if t == 0 { &cache.c0[..] } else { cache.cells.row(t - 1) };
        let h_prev = if t == 0 { &cache.h0[..] } else { cache.hidden.row(t - 1) };
        let go = grad_out.row(t);
        for k in 0..hs {
            let (i, f, g, o) = (z[k], z[hs + k], z[2 * hs + k], z[3 * hs + k]);
            let dh = go[k] + dh_next[k];
            let dc = dc_next[k] + dh * o * (1.0 - tc[k] * tc[k]);
            dz[k] = dc * g * i * (1.0 - i);
            dz[hs + k] = dc * c_prev[k] * f * (1.0 - f);
            dz[2 * hs + k] = dc * i * (1.0 - g * g);
            dz[3 * hs + k] = dh * tc[k] * o * (1.0 - o);
            dc_next[k] = dc * f;
        }

        xh[..is].copy_from_slice(cache.seq.row(t));
        xh[is..].copy_from_slice(h_prev);
        dxh.fill(0.0);
        for (r, &d) in dz.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grads.gate_bias[r] += d;
            axpy(d, &xh, grads.gate_weights.row_mut(r));
            axpy(d, params.gate_weights.row(r), &mut dxh);
        }
        grad_seq.row_mut(t).copy_from_slice(&dxh[..is]);
        dh_next.copy_from_slice(&dxh[is..]);
    }

    Ok(LstmInputGrads {
        seq: grad_seq,
        h0: dh_next,
        c0: dc_next,
    })
}
