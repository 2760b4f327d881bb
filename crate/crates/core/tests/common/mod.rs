//! Test-only oracles, independent of the code paths they check.
#![allow(dead_code)]

use lsteeg_core::model::{LsteegConfig, LsteegModel};
use lsteeg_core::nn::{
    dense_backward, dense_forward, dropout_backward, dropout_forward, lstm_backward, lstm_forward,
    DenseParams, LstmParams, Matrix, Mode,
};
use lsteeg_core::synth::Label;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-6;
pub const FD_REL_TOL: f64 = 1e-5;
/// Lower bound on the relative-error denominator. Central differences at
/// step 1e-6 carry ~1e-10 of round-off for O(1) losses, so entries below
/// this magnitude are judged against the floor instead of themselves
/// (an absolute tolerance of 1e-9 there).
pub const FD_MAG_FLOOR: f64 = 1e-4;

/// `|a - n| / max(|a|, |n|, FD_MAG_FLOOR)`
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(FD_MAG_FLOOR);
    (analytic - numeric).abs() / scale
}

/// Central difference of `f` with respect to `x[i]`.
pub fn central_diff(x: &mut [f64], i: usize, f: &mut dyn FnMut(&[f64]) -> f64) -> f64 {
    let orig = x[i];
    x[i] = orig + FD_STEP;
    let plus = f(x);
    x[i] = orig - FD_STEP;
    let minus = f(x);
    x[i] = orig;
    (plus - minus) / (2.0 * FD_STEP)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.random_range(-scale..scale))
}

/// Loss used by the checks: a fixed random projection of the output.
fn project(out: &Matrix, weights: &Matrix) -> f64 {
    out.data().iter().zip(weights.data()).map(|(a, b)| a * b).sum()
}

/// Largest relative error over every dense-layer gradient entry.
pub fn dense_gradcheck(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, i, o) = (rng.random_range(1..4), rng.random_range(1..6), rng.random_range(1..6));
    let mut p = DenseParams::init(i, o, &mut rng);
    for b in &mut p.bias {
        *b = rng.random_range(-0.5..0.5);
    }
    let x = random_matrix(&mut rng, n, i, 1.0);
    let proj = random_matrix(&mut rng, n, o, 1.0);

    let y = dense_forward(&p, &x).unwrap();
    let mut g = p.zeros_like();
    let gx = dense_backward(&p, &x, &proj, &mut g).unwrap();
    let _ = y;

    let mut worst: f64 = 0.0;
    let mut w = p.weight.data().to_vec();
    for k in 0..w.len() {
        let num = central_diff(&mut w, k, &mut |w| {
            let mut q = p.clone();
            q.weight.data_mut().copy_from_slice(w);
            project(&dense_forward(&q, &x).unwrap(), &proj)
        });
        worst = worst.max(rel_err(g.weight.data()[k], num));
    }
    let mut b = p.bias.clone();
    for k in 0..b.len() {
        let num = central_diff(&mut b, k, &mut |b| {
            let mut q = p.clone();
            q.bias.copy_from_slice(b);
            project(&dense_forward(&q, &x).unwrap(), &proj)
        });
        worst = worst.max(rel_err(g.bias[k], num));
    }
    let mut xv = x.data().to_vec();
    for k in 0..xv.len() {
        let num = central_diff(&mut xv, k, &mut |xv| {
            let xm = Matrix::from_vec(n, i, xv.to_vec()).unwrap();
            project(&dense_forward(&p, &xm).unwrap(), &proj)
        });
        worst = worst.max(rel_err(gx.data()[k], num));
    }
    worst
}

/// Largest relative error over every LSTM gradient entry (weights, biases,
/// sequence and both initial states) for the I=2, H=3, T=4 net.
pub fn lstm_gradcheck(seed: u64) -> f64 {
    lstm_gradcheck_shape(seed, 2, 3, 4)
}

pub fn lstm_gradcheck_shape(seed: u64, is: usize, hs: usize, steps: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = LstmParams::init(is, hs, &mut rng);
    for b in &mut p.gate_bias {
        *b += rng.random_range(-0.5..0.5);
    }
    let seq = random_matrix(&mut rng, steps, is, 1.0);
    let h0: Vec<f64> = (0..hs).map(|_| rng.random_range(-0.5..0.5)).collect();
    let c0: Vec<f64> = (0..hs).map(|_| rng.random_range(-0.5..0.5)).collect();
    let proj = random_matrix(&mut rng, steps, hs, 1.0);

    let loss = |p: &LstmParams, seq: &Matrix, h0: &[f64], c0: &[f64]| {
        project(&lstm_forward(p, seq, h0, c0).unwrap().0, &proj)
    };
    let (_, cache) = lstm_forward(&p, &seq, &h0, &c0).unwrap();
    let mut g = p.zeros_like();
    let gi = lstm_backward(&p, &cache, &proj, &mut g).unwrap();

    let mut worst: f64 = 0.0;
    let mut w = p.gate_weights.data().to_vec();
    for k in 0..w.len() {
        let num = central_diff(&mut w, k, &mut |w| {
            let mut q = p.clone();
            q.gate_weights.data_mut().copy_from_slice(w);
            loss(&q, &seq, &h0, &c0)
        });
        worst = worst.max(rel_err(g.gate_weights.data()[k], num));
    }
    let mut b = p.gate_bias.clone();
    for k in 0..b.len() {
        let num = central_diff(&mut b, k, &mut |b| {
            let mut q = p.clone();
            q.gate_bias.copy_from_slice(b);
            loss(&q, &seq, &h0, &c0)
        });
        worst = worst.max(rel_err(g.gate_bias[k], num));
    }
    let mut sv = seq.data().to_vec();
    for k in 0..sv.len() {
        let num = central_diff(&mut sv, k, &mut |sv| {
            loss(&p, &Matrix::from_vec(steps, is, sv.to_vec()).unwrap(), &h0, &c0)
        });
        worst = worst.max(rel_err(gi.seq.data()[k], num));
    }
    let mut hv = h0.clone();
    for k in 0..hs {
        let num = central_diff(&mut hv, k, &mut |hv| loss(&p, &seq, hv, &c0));
        worst = worst.max(rel_err(gi.h0[k], num));
    }
    let mut cv = c0.clone();
    for k in 0..hs {
        let num = central_diff(&mut cv, k, &mut |cv| loss(&p, &seq, &h0, cv));
        worst = worst.max(rel_err(gi.c0[k], num));
    }
    worst
}

/// Dropout with a fixed mask (same RNG seed on every evaluation).
pub fn dropout_gradcheck(seed: u64, p: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r, c) = (rng.random_range(1..5), rng.random_range(1..5));
    let x = random_matrix(&mut rng, r, c, 1.0);
    let proj = random_matrix(&mut rng, r, c, 1.0);
    let mask_seed = rng.random::<u64>();
    let fwd = |x: &Matrix| {
        let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed);
        dropout_forward(x, p, Mode::Train, &mut mrng).unwrap()
    };
    let (_, mask) = fwd(&x);
    let gx = dropout_backward(&proj, mask.as_ref()).unwrap();
    let mut worst: f64 = 0.0;
    let mut xv = x.data().to_vec();
    for k in 0..xv.len() {
        let num = central_diff(&mut xv, k, &mut |xv| {
            project(&fwd(&Matrix::from_vec(r, c, xv.to_vec()).unwrap()).0, &proj)
        });
        worst = worst.max(rel_err(gx.data()[k], num));
    }
    worst
}

pub fn tiny_config(seed: u64, dropout_p: f64) -> LsteegConfig {
    LsteegConfig {
        n_channels: 3,
        n_samples: 8,
        n_outer: 4,
        n_inner: 3,
        n_latent: 5,
        dropout_p,
        rng_seed: seed,
        normalize: false,
    }
}

/// Full-model check of d mse(forward(x), y) / dθ and d/dx, train mode with a
/// fixed dropout mask.
pub fn model_gradcheck(seed: u64, dropout_p: f64) -> f64 {
    let cfg = tiny_config(seed, dropout_p);
    let model = LsteegModel::build(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let x = random_matrix(&mut rng, 3, 8, 1.0);
    let y = random_matrix(&mut rng, 3, 8, 1.0);
    let mask_seed = rng.random::<u64>();
    let loss_of = |m: &LsteegModel, x: &Matrix| -> f64 {
        let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed);
        let (out, _) = m.forward_trace(x, Mode::Train, &mut mrng).unwrap();
        out.data().iter().zip(y.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            / out.len() as f64
    };

    let mut mrng = ChaCha8Rng::seed_from_u64(mask_seed);
    let (out, trace) = model.forward_trace(&x, Mode::Train, &mut mrng).unwrap();
    let n = out.len() as f64;
    let g_out = out.zip_with(&y, |a, b| 2.0 * (a - b) / n).unwrap();
    let mut grads = model.params.zeros_like();
    let gx = model.backward(&trace, &g_out, &mut grads).unwrap();

    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.data.to_vec()).collect();
    let mut worst: f64 = 0.0;
    for (ti, a) in analytic.iter().enumerate() {
        for k in 0..a.len() {
            let probe = |delta: f64| {
                let mut m = model.clone();
                m.params.tensors_mut()[ti][k] += delta;
                loss_of(&m, &x)
            };
            let num = (probe(FD_STEP) - probe(-FD_STEP)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(a[k], num));
        }
    }
    let mut xv = x.data().to_vec();
    for k in 0..xv.len() {
        let num = central_diff(&mut xv, k, &mut |xv| {
            loss_of(&model, &Matrix::from_vec(3, 8, xv.to_vec()).unwrap())
        });
        worst = worst.max(rel_err(gx.data()[k], num));
    }
    worst
}

/// Standard-normal white noise.
pub fn white_noise(seed: u64, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// Relative gap between the integrated Welch PSD and the time-domain
/// variance of 60 s of white noise plus a 10 Hz tone at 200 Hz.
pub fn parseval_rel_err(seed: u64) -> f64 {
    use lsteeg_core::signal::{welch_psd, WelchConfig};
    let fs = 200.0;
    let noise = white_noise(seed, 12_000);
    let x: Vec<f64> = noise
        .iter()
        .enumerate()
        .map(|(i, w)| w + 2.0 * (2.0 * std::f64::consts::PI * 10.0 * i as f64 / fs).sin())
        .collect();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
    let psd = welch_psd(&Matrix::from_vec(1, x.len(), x).unwrap(), fs, &WelchConfig::default()).unwrap();
    (psd.total_power(0) - var).abs() / var
}

fn bandpass_1_45(x: Vec<f64>) -> Vec<f64> {
    use lsteeg_core::signal::{bandpass, Recording};
    let n = x.len();
    let rec = Recording::new(0, 200.0, vec!["Cz".into()], Matrix::from_vec(1, n, x).unwrap()).unwrap();
    bandpass(&rec, 1.0, 45.0).unwrap().data.row(0).to_vec()
}

/// Largest |output| for a unit constant through the 1-45 Hz bandpass (10 s at 200 Hz).
pub fn bandpass_dc_residual() -> f64 {
    bandpass_1_45(vec![1.0; 2000]).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Output/input RMS of a 10 s, 60 Hz tone through the 1-45 Hz bandpass.
pub fn bandpass_60hz_ratio(phase: f64) -> f64 {
    let x: Vec<f64> = (0..2000)
        .map(|i| (phase + 2.0 * std::f64::consts::PI * 60.0 * i as f64 / 200.0).sin())
        .collect();
    rms(&bandpass_1_45(x.clone())) / rms(&x)
}

/// Lag (in samples, within ±max_lag) maximizing the input/output
/// cross-correlation of bandpassed white noise.
pub fn bandpass_peak_lag(seed: u64, max_lag: i64) -> i64 {
    let x = white_noise(seed, 4000);
    let y = bandpass_1_45(x.clone());
    let n = x.len() as i64;
    let xcorr = |lag: i64| -> f64 {
        (0..n)
            .filter(|&t| (0..n).contains(&(t + lag)))
            .map(|t| x[t as usize] * y[(t + lag) as usize])
            .sum()
    };
    (-max_lag..=max_lag)
        .max_by(|&a, &b| xcorr(a).total_cmp(&xcorr(b)))
        .unwrap()
}

/// Brute force: P(noisy score > clean score) + ½ P(tie), as an exact ratio.
pub fn pairwise_auc(scores: &[f64], labels: &[Label]) -> f64 {
    let (mut wins2, mut pairs) = (0u128, 0u128);
    for (i, li) in labels.iter().enumerate() {
        for (j, lj) in labels.iter().enumerate() {
            if *li == Label::Noisy && *lj == Label::Clean {
                pairs += 1;
                if scores[i] > scores[j] {
                    wins2 += 2;
                } else if scores[i] == scores[j] {
                    wins2 += 1;
                }
            }
        }
    }
    wins2 as f64 / (2 * pairs) as f64
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, levels: u32) -> (Vec<f64>, Vec<Label>) {
    loop {
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.37).collect();
        let labels: Vec<Label> = (0..n).map(|_| if rng.random_bool(0.4) { Label::Noisy } else { Label::Clean }).collect();
        if labels.contains(&Label::Noisy) && labels.contains(&Label::Clean) {
            return (scores, labels);
        }
    }
}
