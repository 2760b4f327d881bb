//! Welch power spectral density.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::nn::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap: f64,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_len: 256,
            overlap: 0.5,
        }
    }
}

/// One-sided PSD in units²/Hz, one row per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub freqs: Vec<f64>,
    pub power: Matrix,
}

impl PsdEstimate {
    pub fn resolution(&self) -> f64 {
        if self.freqs.len() > 1 {
            self.freqs[1] - self.freqs[0]
        } else {
            0.0
        }
    }

    /// Integral of the PSD over all bins (≈ signal variance).
    pub fn total_power(&self, channel: usize) -> f64 {
        self.power.row(channel).iter().sum::<f64>() * self.resolution()
    }
}

fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    // periodic Hann
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Segment start offsets. Full segments are laid out with the configured
/// hop; if samples remain uncovered, one more segment is added at the next
/// hop and zero-padded to full length.
fn segment_starts(n: usize, seg: usize, hop: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut s = 0;
    while s + seg <= n {
        starts.push(s);
        s += hop;
    }
    if let Some(&last) = starts.last() {
        if last + seg < n {
            starts.push(last + hop);
        }
    }
    starts
}

/// Welch PSD (Hann window, per-segment mean removal, averaged one-sided
/// periodograms). Each row of `data` is a channel sampled at `fs`.
pub fn welch_psd(data: &Matrix, fs: f64, cfg: &WelchConfig) -> Result<PsdEstimate> {
    let n = data.cols();
    if n == 0 || cfg.segment_len == 0 || !(0.0..1.0).contains(&cfg.overlap) || fs <= 0.0 {
        return Err(Error::Config(format!(
            "welch: {n} samples, segment {} overlap {} fs {fs}",
            cfg.segment_len, cfg.overlap
        )));
    }
    let seg = cfg.segment_len.min(n);
    let hop = ((seg as f64 * (1.0 - cfg.overlap)).round() as usize).max(1);
    let starts = segment_starts(n, seg, hop);
    let window = hann(seg);
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let n_bins = seg / 2 + 1;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);

    let mut power = Matrix::zeros(data.rows(), n_bins);
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    for ch in 0..data.rows() {
        let x = data.row(ch);
        let acc = power.row_mut(ch);
        for &s in &starts {
            let end = (s + seg).min(n);
            let chunk = &x[s..end];
            let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
            for (i, b) in buf.iter_mut().enumerate() {
                let v = chunk.get(i).map_or(0.0, |v| v - mean);
                *b = Complex64::new(v * window[i], 0.0);
            }
            fft.process(&mut buf);
            for (k, a) in acc.iter_mut().enumerate() {
                let mut p = buf[k].norm_sqr() / (fs * win_energy);
                if k != 0 && !(seg % 2 == 0 && k == seg / 2) {
                    p *= 2.0;
                }
                *a += p;
            }
        }
        for a in acc.iter_mut() {
            *a /= starts.len() as f64;
        }
    }
    let freqs = (0..n_bins).map(|k| k as f64 * fs / seg as f64).collect();
    Ok(PsdEstimate { freqs, power })
}
