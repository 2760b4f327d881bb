//! The LSTM autoencoder: encoder, decoder and their parameters.
//!
//! Encoder: `LSTM(C→N_o) → LSTM(N_o→N_i) → flatten → Dense(N_i·T → N_LS)`.
//! Decoder: `Dense(N_LS → N_i·T) → reshape T×N_i → LSTM(N_i→N_i) → LSTM(N_i→N_o)
//! → Dense(N_o→C)` applied per timestep.
//!
//! Epochs are `C × T` matrices (channels by samples); the recurrent layers
//! consume them time-major. Dropout follows every layer except the final
//! projection and is only active in [`Mode::Train`].

mod checkpoint;

pub use checkpoint::{load, read_checkpoint, save, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dims, Error, Result};
use crate::nn::{
    check_dropout_p, dense_backward, dense_forward, dropout_backward, dropout_forward,
    lstm_backward, lstm_forward, DenseParams, DropoutMask, LstmCache, LstmParams, Matrix, Mode,
};
use crate::signal::EpochScale;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LsteegConfig {
    pub n_channels: usize,
    pub n_samples: usize,
    pub n_outer: usize,
    pub n_inner: usize,
    pub n_latent: usize,
    pub dropout_p: f64,
    pub rng_seed: u64,
    /// Per-epoch z-scoring in front of the network (inverted on the output).
    pub normalize: bool,
}

impl Default for LsteegConfig {
    fn default() -> Self {
        Self {
            n_channels: 19,
            n_samples: 500,
            n_outer: 50,
            n_inner: 25,
            n_latent: 500,
            dropout_p: 0.1,
            rng_seed: 0,
            normalize: true,
        }
    }
}

impl LsteegConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_channels", self.n_channels),
            ("n_samples", self.n_samples),
            ("n_outer", self.n_outer),
            ("n_inner", self.n_inner),
            ("n_latent", self.n_latent),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        check_dropout_p(self.dropout_p)
    }

    /// Trainable parameter count from the layer shapes alone.
    pub fn param_count(&self) -> usize {
        let lstm = |i: usize, h: usize| 4 * h * (i + h + 1);
        let dense = |i: usize, o: usize| o * i + o;
        let (c, t, no, ni, nl) = (
            self.n_channels,
            self.n_samples,
            self.n_outer,
            self.n_inner,
            self.n_latent,
        );
        lstm(c, no)
            + lstm(no, ni)
            + dense(ni * t, nl)
            + dense(nl, ni * t)
            + lstm(ni, ni)
            + lstm(ni, no)
            + dense(no, c)
    }
}

/// Parameters of every layer. Also used as the gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct LsteegParams {
    pub enc_lstm1: LstmParams,
    pub enc_lstm2: LstmParams,
    pub enc_dense: DenseParams,
    pub dec_dense: DenseParams,
    pub dec_lstm1: LstmParams,
    pub dec_lstm2: LstmParams,
    pub out_dense: DenseParams,
}

/// Borrowed view of one stored tensor.
#[derive(Debug)]
pub struct TensorRef<'a> {
    pub name: &'static str,
    pub shape: (usize, usize),
    pub data: &'a [f64],
}

const TENSOR_NAMES: [&str; 14] = [
    "encoder.lstm1.weight",
    "encoder.lstm1.bias",
    "encoder.lstm2.weight",
    "encoder.lstm2.bias",
    "encoder.dense.weight",
    "encoder.dense.bias",
    "decoder.dense.weight",
    "decoder.dense.bias",
    "decoder.lstm1.weight",
    "decoder.lstm1.bias",
    "decoder.lstm2.weight",
    "decoder.lstm2.bias",
    "decoder.out.weight",
    "decoder.out.bias",
];

impl LsteegParams {
    pub fn zeros(cfg: &LsteegConfig) -> Self {
        let ti = cfg.n_inner * cfg.n_samples;
        Self {
            enc_lstm1: LstmParams::zeros(cfg.n_channels, cfg.n_outer),
            enc_lstm2: LstmParams::zeros(cfg.n_outer, cfg.n_inner),
            enc_dense: DenseParams::zeros(ti, cfg.n_latent),
            dec_dense: DenseParams::zeros(cfg.n_latent, ti),
            dec_lstm1: LstmParams::zeros(cfg.n_inner, cfg.n_inner),
            dec_lstm2: LstmParams::zeros(cfg.n_inner, cfg.n_outer),
            out_dense: DenseParams::zeros(cfg.n_outer, cfg.n_channels),
        }
    }

    fn init<R: Rng + ?Sized>(cfg: &LsteegConfig, rng: &mut R) -> Self {
        let ti = cfg.n_inner * cfg.n_samples;
        Self {
            enc_lstm1: LstmParams::init(cfg.n_channels, cfg.n_outer, rng),
            enc_lstm2: LstmParams::init(cfg.n_outer, cfg.n_inner, rng),
            enc_dense: DenseParams::init(ti, cfg.n_latent, rng),
            dec_dense: DenseParams::init(cfg.n_latent, ti, rng),
            dec_lstm1: LstmParams::init(cfg.n_inner, cfg.n_inner, rng),
            dec_lstm2: LstmParams::init(cfg.n_inner, cfg.n_outer, rng),
            out_dense: DenseParams::init(cfg.n_outer, cfg.n_channels, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            enc_lstm1: self.enc_lstm1.zeros_like(),
            enc_lstm2: self.enc_lstm2.zeros_like(),
            enc_dense: self.enc_dense.zeros_like(),
            dec_dense: self.dec_dense.zeros_like(),
            dec_lstm1: self.dec_lstm1.zeros_like(),
            dec_lstm2: self.dec_lstm2.zeros_like(),
            out_dense: self.out_dense.zeros_like(),
        }
    }

    /// Every stored tensor in canonical order.
    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let pairs: [(&Matrix, &[f64]); 7] = [
            (&self.enc_lstm1.gate_weights, &self.enc_lstm1.gate_bias),
            (&self.enc_lstm2.gate_weights, &self.enc_lstm2.gate_bias),
            (&self.enc_dense.weight, &self.enc_dense.bias),
            (&self.dec_dense.weight, &self.dec_dense.bias),
            (&self.dec_lstm1.gate_weights, &self.dec_lstm1.gate_bias),
            (&self.dec_lstm2.gate_weights, &self.dec_lstm2.gate_bias),
            (&self.out_dense.weight, &self.out_dense.bias),
        ];
        let mut out = Vec::with_capacity(14);
        for (k, (w, b)) in pairs.into_iter().enumerate() {
            out.push(TensorRef {
                name: TENSOR_NAMES[2 * k],
                shape: w.shape(),
                data: w.data(),
            });
            out.push(TensorRef {
                name: TENSOR_NAMES[2 * k + 1],
                shape: (b.len(), 1),
                data: b,
            });
        }
        out
    }

    /// Mutable slices in the same order as [`LsteegParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.enc_lstm1.gate_weights.data_mut(),
            &mut self.enc_lstm1.gate_bias,
            self.enc_lstm2.gate_weights.data_mut(),
            &mut self.enc_lstm2.gate_bias,
            self.enc_dense.weight.data_mut(),
            &mut self.enc_dense.bias,
            self.dec_dense.weight.data_mut(),
            &mut self.dec_dense.bias,
            self.dec_lstm1.gate_weights.data_mut(),
            &mut self.dec_lstm1.gate_bias,
            self.dec_lstm2.gate_weights.data_mut(),
            &mut self.dec_lstm2.gate_bias,
            self.out_dense.weight.data_mut(),
            &mut self.out_dense.bias,
        ]
    }

    pub fn tensor_sizes(&self) -> Vec<usize> {
        self.tensors().iter().map(|t| t.data.len()).collect()
    }

    pub fn fill(&mut self, v: f64) {
        for t in self.tensors_mut() {
            t.fill(v);
        }
    }

    /// `self += k * other`
    pub fn add_scaled(&mut self, k: f64, other: &LsteegParams) {
        let src: Vec<Vec<f64>> = other.tensors().iter().map(|t| t.data.to_vec()).collect();
        for (dst, s) in self.tensors_mut().into_iter().zip(&src) {
            crate::nn::axpy(k, s, dst);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsteegModel {
    config: LsteegConfig,
    pub params: LsteegParams,
}

/// Intermediate state of a forward pass, consumed by [`LsteegModel::backward`].
#[derive(Debug)]
pub struct ForwardTrace {
    enc1: LstmCache,
    enc1_mask: Option<DropoutMask>,
    enc2: LstmCache,
    enc2_mask: Option<DropoutMask>,
    flat: Matrix,
    latent_mask: Option<DropoutMask>,
    latent: Matrix,
    dec_dense_mask: Option<DropoutMask>,
    dec1: LstmCache,
    dec1_mask: Option<DropoutMask>,
    dec2: LstmCache,
    dec2_mask: Option<DropoutMask>,
    dec2_out: Matrix,
}

/// Deterministic initial parameters for `config`.
pub fn build(config: &LsteegConfig) -> Result<LsteegModel> {
    LsteegModel::build(config)
}

impl LsteegModel {
    pub fn build(config: &LsteegConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        Ok(Self {
            config: config.clone(),
            params: LsteegParams::init(config, &mut rng),
        })
    }

    /// All-zero weights and biases.
    pub fn zeros(config: &LsteegConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config: config.clone(),
            params: LsteegParams::zeros(config),
        })
    }

    pub fn from_parts(config: LsteegConfig, params: LsteegParams) -> Result<Self> {
        config.validate()?;
        let expected = LsteegParams::zeros(&config);
        let shapes = |p: &LsteegParams| p.tensors().iter().map(|t| t.shape).collect::<Vec<_>>();
        ensure_dims!(
            shapes(&expected) == shapes(&params),
            "parameter shapes do not match the configuration"
        );
        Ok(Self { config, params })
    }

    pub fn config(&self) -> &LsteegConfig {
        &self.config
    }

    /// Element count over every stored tensor.
    pub fn param_count(&self) -> usize {
        self.params.tensors().iter().map(|t| t.data.len()).sum()
    }

    fn check_epoch(&self, x: &Matrix) -> Result<()> {
        ensure_dims!(
            x.shape() == (self.config.n_channels, self.config.n_samples),
            "model expects {}x{} epochs, got {:?}",
            self.config.n_channels,
            self.config.n_samples,
            x.shape()
        );
        Ok(())
    }

    /// Encoder `f_E` in eval mode.
    pub fn encode(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.check_epoch(x)?;
        let p = &self.params;
        let h0 = vec![0.0; self.config.n_outer];
        let (a1, _) = lstm_forward(&p.enc_lstm1, &x.transpose(), &h0, &h0)?;
        let h0 = vec![0.0; self.config.n_inner];
        let (a2, _) = lstm_forward(&p.enc_lstm2, &a1, &h0, &h0)?;
        let flat = a2.reshape(1, self.config.n_inner * self.config.n_samples)?;
        Ok(dense_forward(&p.enc_dense, &flat)?.into_vec())
    }

    /// Decoder `f_D` in eval mode.
    pub fn decode(&self, z: &[f64]) -> Result<Matrix> {
        ensure_dims!(
            z.len() == self.config.n_latent,
            "latent vector has length {}, model expects {}",
            z.len(),
            self.config.n_latent
        );
        let p = &self.params;
        let (t, ni, no) = (self.config.n_samples, self.config.n_inner, self.config.n_outer);
        let u = dense_forward(&p.dec_dense, &Matrix::from_vec(1, z.len(), z.to_vec())?)?;
        let seq = u.reshape(t, ni)?;
        let (a3, _) = lstm_forward(&p.dec_lstm1, &seq, &vec![0.0; ni], &vec![0.0; ni])?;
        let (a4, _) = lstm_forward(&p.dec_lstm2, &a3, &vec![0.0; no], &vec![0.0; no])?;
        Ok(dense_forward(&p.out_dense, &a4)?.transpose())
    }

    /// `decode(encode(x))` in eval mode, on the network's own input scale.
    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        self.decode(&self.encode(x)?)
    }

    /// Maps a raw epoch into the space the network operates in.
    pub fn prepare(&self, x: &Matrix) -> Result<(Matrix, Option<EpochScale>)> {
        self.check_epoch(x)?;
        if self.config.normalize {
            let scale = EpochScale::fit(x);
            Ok((scale.apply(x)?, Some(scale)))
        } else {
            Ok((x.clone(), None))
        }
    }

    /// Latent code of a raw epoch (normalized first when configured).
    pub fn embed(&self, x: &Matrix) -> Result<Vec<f64>> {
        let (xn, _) = self.prepare(x)?;
        self.encode(&xn)
    }

    /// Full reconstruction of a raw epoch, returned in the input's units.
    pub fn reconstruct(&self, x: &Matrix) -> Result<Matrix> {
        let (xn, scale) = self.prepare(x)?;
        let y = self.forward(&xn)?;
        match scale {
            Some(s) => s.invert(&y),
            None => Ok(y),
        }
    }

    /// Forward pass that records everything needed by [`LsteegModel::backward`].
    pub fn forward_trace<R: Rng + ?Sized>(
        &self,
        x: &Matrix,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Matrix, ForwardTrace)> {
        self.check_epoch(x)?;
        let p = &self.params;
        let dp = self.config.dropout_p;
        let (t, ni, no) = (self.config.n_samples, self.config.n_inner, self.config.n_outer);
        let zo = vec![0.0; no];
        let zi = vec![0.0; ni];

        let (a1, enc1) = lstm_forward(&p.enc_lstm1, &x.transpose(), &zo, &zo)?;
        let (d1, enc1_mask) = dropout_forward(&a1, dp, mode, rng)?;
        let (a2, enc2) = lstm_forward(&p.enc_lstm2, &d1, &zi, &zi)?;
        let (d2, enc2_mask) = dropout_forward(&a2, dp, mode, rng)?;
        let flat = d2.reshape(1, ni * t)?;
        let z = dense_forward(&p.enc_dense, &flat)?;
        let (latent, latent_mask) = dropout_forward(&z, dp, mode, rng)?;
        let u = dense_forward(&p.dec_dense, &latent)?;
        let (du, dec_dense_mask) = dropout_forward(&u, dp, mode, rng)?;
        let (a3, dec1) = lstm_forward(&p.dec_lstm1, &du.reshape(t, ni)?, &zi, &zi)?;
        let (d3, dec1_mask) = dropout_forward(&a3, dp, mode, rng)?;
        let (a4, dec2) = lstm_forward(&p.dec_lstm2, &d3, &zo, &zo)?;
        let (d4, dec2_mask) = dropout_forward(&a4, dp, mode, rng)?;
        let y = dense_forward(&p.out_dense, &d4)?;
        Ok((
            y.transpose(),
            ForwardTrace {
                enc1,
                enc1_mask,
                enc2,
                enc2_mask,
                flat,
                latent_mask,
                latent,
                dec_dense_mask,
                dec1,
                dec1_mask,
                dec2,
                dec2_mask,
                dec2_out: d4,
            },
        ))
    }

    /// Reverse pass for a traced forward. Parameter gradients are accumulated
    /// into `grads`; the gradient w.r.t. the input epoch is returned.
    pub fn backward(
        &self,
        trace: &ForwardTrace,
        grad_out: &Matrix,
        grads: &mut LsteegParams,
    ) -> Result<Matrix> {
        self.check_epoch(grad_out)?;
        let p = &self.params;
        let (t, ni) = (self.config.n_samples, self.config.n_inner);

        let g_y = grad_out.transpose();
        let g_d4 = dense_backward(&p.out_dense, &trace.dec2_out, &g_y, &mut grads.out_dense)?;
        let g_a4 = dropout_backward(&g_d4, trace.dec2_mask.as_ref())?;
        let g = lstm_backward(&p.dec_lstm2, &trace.dec2, &g_a4, &mut grads.dec_lstm2)?;
        let g_a3 = dropout_backward(&g.seq, trace.dec1_mask.as_ref())?;
        let g = lstm_backward(&p.dec_lstm1, &trace.dec1, &g_a3, &mut grads.dec_lstm1)?;
        let g_u = dropout_backward(&g.seq.reshape(1, t * ni)?, trace.dec_dense_mask.as_ref())?;
        let g_latent = dense_backward(&p.dec_dense, &trace.latent, &g_u, &mut grads.dec_dense)?;
        let g_z = dropout_backward(&g_latent, trace.latent_mask.as_ref())?;
        let g_flat = dense_backward(&p.enc_dense, &trace.flat, &g_z, &mut grads.enc_dense)?;
        let g_a2 = dropout_backward(&g_flat.reshape(t, ni)?, trace.enc2_mask.as_ref())?;
        let g = lstm_backward(&p.enc_lstm2, &trace.enc2, &g_a2, &mut grads.enc_lstm2)?;
        let g_a1 = dropout_backward(&g.seq, trace.enc1_mask.as_ref())?;
        let g = lstm_backward(&p.enc_lstm1, &trace.enc1, &g_a1, &mut grads.enc_lstm1)?;
        Ok(g.seq.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LsteegConfig {
        LsteegConfig {
            n_channels: 3,
            n_samples: 8,
            n_outer: 4,
            n_inner: 3,
            n_latent: 5,
            dropout_p: 0.1,
            rng_seed: 7,
            normalize: false,
        }
    }

    #[test]
    fn default_param_count_matches_hand_sum() {
        // per-layer counts for C=19, T=500, N_o=50, N_i=25, N_LS=500
        let enc_lstm1 = 4 * 50 * (19 + 50 + 1); // 14_000
        let enc_lstm2 = 4 * 25 * (50 + 25 + 1); // 7_600
        let enc_dense = 12_500 * 500 + 500; // 6_250_500
        let dec_dense = 500 * 12_500 + 12_500; // 6_262_500
        let dec_lstm1 = 4 * 25 * (25 + 25 + 1); // 5_100
        let dec_lstm2 = 4 * 50 * (25 + 50 + 1); // 15_200
        let out = 50 * 19 + 19; // 969
        let hand = enc_lstm1 + enc_lstm2 + enc_dense + dec_dense + dec_lstm1 + dec_lstm2 + out;
        assert_eq!(hand, 12_555_869);
        let cfg = LsteegConfig::default();
        assert_eq!(cfg.param_count(), hand);
        assert_eq!(LsteegParams::zeros(&cfg).tensor_sizes().iter().sum::<usize>(), hand);
    }

    #[test]
    fn larger_latent_has_more_params() {
        let small = LsteegConfig::default();
        let big = LsteegConfig {
            n_latent: 2000,
            ..small.clone()
        };
        assert!(big.param_count() > small.param_count());
    }

    #[test]
    fn compression_holds_for_default() {
        let c = LsteegConfig::default();
        assert!(c.n_latent < c.n_channels * c.n_samples);
    }

    #[test]
    fn build_is_deterministic() {
        let a = LsteegModel::build(&tiny()).unwrap();
        let b = LsteegModel::build(&tiny()).unwrap();
        assert_eq!(a, b);
        let c = LsteegModel::build(&LsteegConfig { rng_seed: 8, ..tiny() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn forget_bias_initialized_to_one() {
        let m = LsteegModel::build(&tiny()).unwrap();
        let h = m.config().n_outer;
        assert!(m.params.enc_lstm1.gate_bias[h..2 * h].iter().all(|&v| v == 1.0));
        assert!(m.params.enc_lstm1.gate_bias[..h].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_dims_rejected() {
        for f in [
            |c: &mut LsteegConfig| c.n_channels = 0,
            |c: &mut LsteegConfig| c.n_latent = 0,
            |c: &mut LsteegConfig| c.n_samples = 0,
            |c: &mut LsteegConfig| c.dropout_p = 1.0,
        ] {
            let mut c = tiny();
            f(&mut c);
            assert!(matches!(LsteegModel::build(&c), Err(Error::Config(_))));
        }
    }

    #[test]
    fn zero_model_outputs_zero() {
        let m = LsteegModel::zeros(&tiny()).unwrap();
        let x = Matrix::from_fn(3, 8, |r, c| (r * 8 + c) as f64 - 5.0);
        assert!(m.forward(&x).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eval_forward_is_repeatable_and_shaped() {
        let m = LsteegModel::build(&tiny()).unwrap();
        let x = Matrix::from_fn(3, 8, |r, c| ((r + 2 * c) as f64).sin());
        let a = m.forward(&x).unwrap();
        assert_eq!(a.shape(), (3, 8));
        assert_eq!(a, m.forward(&x).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (b, _) = m.forward_trace(&x, Mode::Eval, &mut rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(m.encode(&x).unwrap().len(), 5);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let m = LsteegModel::build(&tiny()).unwrap();
        assert!(matches!(m.encode(&Matrix::zeros(8, 3)), Err(Error::Dimension(_))));
        assert!(matches!(m.decode(&[0.0; 4]), Err(Error::Dimension(_))));
    }
}
