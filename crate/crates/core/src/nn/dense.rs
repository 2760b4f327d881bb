use rand::Rng;

use super::matrix::{axpy, dot, Matrix};
use crate::error::{ensure_dims, Result};

/// Fully connected layer `y = W x + b` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl DenseParams {
    pub fn zeros(in_features: usize, out_features: usize) -> Self {
        Self {
            weight: Matrix::zeros(out_features, in_features),
            bias: vec![0.0; out_features],
        }
    }

    /// Weights ~ U(-1/sqrt(in), 1/sqrt(in)), zero bias.
    pub fn init<R: Rng + ?Sized>(in_features: usize, out_features: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (in_features as f64).sqrt();
        let weight = Matrix::from_fn(out_features, in_features, |_, _| {
            rng.random_range(-bound..bound)
        });
        Self {
            weight,
            bias: vec![0.0; out_features],
        }
    }

    pub fn in_features(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_features(&self) -> usize {
        self.weight.rows()
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.in_features(), self.out_features())
    }
}

/// Applies the layer to every row of `x` (`N × in` → `N × out`).
pub fn dense_forward(params: &DenseParams, x: &Matrix) -> Result<Matrix> {
    ensure_dims!(
        x.cols() == params.in_features(),
        "dense layer expects {} input features, got {}",
        params.in_features(),
        x.cols()
    );
    let out_f = params.out_features();
    let mut y = Matrix::zeros(x.rows(), out_f);
    for n in 0..x.rows() {
        let xr = x.row(n);
        let yr = y.row_mut(n);
        for (o, yo) in yr.iter_mut().enumerate() {
            *yo = params.bias[o] + dot(params.weight.row(o), xr);
        }
    }
    Ok(y)
}

/// Accumulates parameter gradients into `grads` and returns the gradient
/// with respect to `x`.
pub fn dense_backward(
    params: &DenseParams,
    x: &Matrix,
    grad_out: &Matrix,
    grads: &mut DenseParams,
) -> Result<Matrix> {
    ensure_dims!(
        grad_out.rows() == x.rows() && grad_out.cols() == params.out_features(),
        "dense backward: grad {:?} does not match input rows {} / out features {}",
        grad_out.shape(),
        x.rows(),
        params.out_features()
    );
    ensure_dims!(
        x.cols() == params.in_features() && grads.weight.shape() == params.weight.shape(),
        "dense backward: input or gradient buffer has the wrong shape"
    );
    let mut grad_x = Matrix::zeros(x.rows(), x.cols());
    for n in 0..x.rows() {
        let xr = x.row(n);
        let gr = grad_out.row(n);
        for (o, &g) in gr.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grads.bias[o] += g;
            axpy(g, xr, grads.weight.row_mut(o));
            axpy(g, params.weight.row(o), grad_x.row_mut(n));
        }
    }
    Ok(grad_x)
}
