use crate::error::{ensure_dims, Error, Result};

/// Bias-corrected Adam moments, one `(m, v)` pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Zero moments sized after `shapes` (element counts per tensor).
    pub fn new(sizes: &[usize]) -> Self {
        Self {
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.v
    }
}

/// One Adam update of every tensor in `params` using the matching `grads`.
pub fn adam_step(
    state: &mut AdamState,
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    lr: f64,
) -> Result<()> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
    }
    ensure_dims!(
        params.len() == state.m.len() && grads.len() == state.m.len(),
        "adam: {} tensors in state, {} params, {} grads",
        state.m.len(),
        params.len(),
        grads.len()
    );
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        ensure_dims!(
            p.len() == state.m[k].len() && g.len() == state.m[k].len(),
            "adam: tensor {k} has {} params / {} grads, state expects {}",
            p.len(),
            g.len(),
            state.m[k].len()
        );
    }

    state.step += 1;
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    let bc1 = 1.0 - b1.powi(state.step.min(i32::MAX as u64) as i32);
    let bc2 = 1.0 - b2.powi(state.step.min(i32::MAX as u64) as i32);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[k], &mut state.v[k]);
        for j in 0..p.len() {
            let gj = g[j];
            m[j] = b1 * m[j] + (1.0 - b1) * gj;
            v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
            let m_hat = m[j] / bc1;
            let v_hat = v[j] / bc2;
            p[j] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
