use super::matrix::Matrix;
use crate::error::{ensure_dims, Result};

/// Mean squared error over all elements and its gradient w.r.t. `pred`.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> Result<(f64, Matrix)> {
    let loss = mse(pred, target)?;
    let n = pred.len().max(1) as f64;
    let grad = pred.zip_with(target, |p, t| 2.0 * (p - t) / n)?;
    Ok((loss, grad))
}

/// Mean squared error only.
pub fn mse(pred: &Matrix, target: &Matrix) -> Result<f64> {
    ensure_dims!(
        pred.shape() == target.shape(),
        "mse between {:?} and {:?}",
        pred.shape(),
        target.shape()
    );
    let n = pred.len().max(1) as f64;
    let s: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(s / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_inputs_give_zero() {
        let x = Matrix::from_fn(3, 3, |r, c| (r as f64).sin() + c as f64);
        let (l, g) = mse_loss(&x, &x).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_example() {
        let p = Matrix::from_rows(&[vec![1.0, 3.0]]).unwrap();
        let t = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let (l, g) = mse_loss(&p, &t).unwrap();
        assert_eq!(l, 2.0);
        assert_eq!(g.data(), &[0.0, 2.0]);
    }

    #[test]
    fn shape_mismatch() {
        assert!(mse(&Matrix::zeros(1, 2), &Matrix::zeros(2, 1)).is_err());
    }
}
