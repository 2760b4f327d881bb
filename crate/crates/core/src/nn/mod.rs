//! Numerical substrate: matrices, dense and LSTM layers with hand-written
//! backward passes, dropout, MSE, Adam and a cosine learning-rate schedule.
//!
//! Everything is `f64` and deterministic given explicit RNG state.

mod adam;
mod dense;
mod dropout;
mod loss;
mod lstm;
mod matrix;
mod schedule;

pub use adam::{adam_step, AdamState};
pub use dense::{dense_backward, dense_forward, DenseParams};
pub use dropout::{check_dropout_p, dropout_backward, dropout_forward, DropoutMask, Mode};
pub use loss::{mse, mse_loss};
pub use lstm::{lstm_backward, lstm_forward, Gate, LstmCache, LstmInputGrads, LstmParams};
pub use matrix::{axpy, dot, Matrix};
pub use schedule::{cosine_lr, CosineSchedule};
