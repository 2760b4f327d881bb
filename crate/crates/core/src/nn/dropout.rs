use rand::Rng;

use super::matrix::Matrix;
use crate::error::{ensure_dims, Error, Result};

/// Whether stochastic layers are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Per-element multipliers recorded by a training-mode dropout pass:
/// `0` for dropped units, `1/(1-p)` for kept ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    scale: Vec<f64>,
}

pub fn check_dropout_p(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("dropout probability {p} outside [0, 1)")))
    }
}

/// Inverted dropout. Eval mode and `p == 0` are the identity and return no mask.
pub fn dropout_forward<R: Rng + ?Sized>(
    x: &Matrix,
    p: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<(Matrix, Option<DropoutMask>)> {
    check_dropout_p(p)?;
    if mode == Mode::Eval || p == 0.0 {
        return Ok((x.clone(), None));
    }
    let keep = 1.0 / (1.0 - p);
    let scale: Vec<f64> = (0..x.len())
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect();
    let mut y = x.clone();
    for (v, s) in y.data_mut().iter_mut().zip(&scale) {
        *v *= s;
    }
    Ok((y, Some(DropoutMask { scale })))
}

pub fn dropout_backward(grad_out: &Matrix, mask: Option<&DropoutMask>) -> Result<Matrix> {
    let Some(mask) = mask else {
        return Ok(grad_out.clone());
    };
    ensure_dims!(
        mask.scale.len() == grad_out.len(),
        "dropout mask covers {} elements, gradient has {}",
        mask.scale.len(),
        grad_out.len()
    );
    let mut g = grad_out.clone();
    for (v, s) in g.data_mut().iter_mut().zip(&mask.scale) {
        *v *= s;
    }
    Ok(g)
}
