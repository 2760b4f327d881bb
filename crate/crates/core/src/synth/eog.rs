//! Linear EOG contamination: `x̂ʲ = xʲ + aʲ·VEOG + bʲ·HEOG`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dims, Error, Result};
use crate::nn::Matrix;
use crate::signal::{Recording, CHANNEL_POSITIONS, CHANNEL_ROWS};

/// Per-channel propagation weights of the vertical (`a`) and horizontal (`b`)
/// EOG components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EogCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

const A_MAX: f64 = 0.8;
const B_MAX: f64 = 0.4;
/// Decay length in electrode rows.
const TAU_ROWS: f64 = 1.5;

impl EogCoefficients {
    /// Parametric frontal-dominant profile over the 19 standard channels:
    /// `a = 0.8·exp(-row/1.5)`, `b = ±0.4·exp(-row/1.5)` with the sign given
    /// by hemisphere (left positive, midline zero).
    pub fn standard() -> Self {
        let decay = |row: usize| (-(row as f64) / TAU_ROWS).exp();
        let a = CHANNEL_ROWS.iter().map(|&r| A_MAX * decay(r)).collect();
        let b = CHANNEL_ROWS
            .iter()
            .zip(CHANNEL_POSITIONS)
            .map(|(&r, (x, _))| {
                let side = if x < 0.0 {
                    1.0
                } else if x > 0.0 {
                    -1.0
                } else {
                    0.0
                };
                side * B_MAX * decay(r)
            })
            .collect();
        Self { a, b }
    }

    pub fn zeros(n_channels: usize) -> Self {
        Self {
            a: vec![0.0; n_channels],
            b: vec![0.0; n_channels],
        }
    }

    pub fn n_channels(&self) -> usize {
        self.a.len()
    }
}

/// The additive term `aʲ·VEOG + bʲ·HEOG` as a channels × samples matrix.
pub fn eog_contribution(veog: &[f64], heog: &[f64], coeffs: &EogCoefficients) -> Result<Matrix> {
    ensure_dims!(
        coeffs.a.len() == coeffs.b.len(),
        "{} VEOG vs {} HEOG coefficients",
        coeffs.a.len(),
        coeffs.b.len()
    );
    ensure_dims!(veog.len() == heog.len(), "VEOG {} vs HEOG {} samples", veog.len(), heog.len());
    Ok(Matrix::from_fn(coeffs.n_channels(), veog.len(), |c, t| {
        coeffs.a[c] * veog[t] + coeffs.b[c] * heog[t]
    }))
}

pub fn contaminate_eog(
    rec: &Recording,
    veog: &[f64],
    heog: &[f64],
    coeffs: &EogCoefficients,
) -> Result<Recording> {
    ensure_dims!(
        veog.len() == rec.n_samples(),
        "EOG has {} samples, recording {}",
        veog.len(),
        rec.n_samples()
    );
    ensure_dims!(
        coeffs.n_channels() == rec.data.rows(),
        "{} coefficients for {} channels",
        coeffs.n_channels(),
        rec.data.rows()
    );
    let add = eog_contribution(veog, heog, coeffs)?;
    Ok(Recording {
        data: rec.data.add(&add)?,
        ..rec.clone()
    })
}

/// One placed ocular event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EogEvent {
    pub onset: usize,
    pub len: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EogTraces {
    pub veog: Vec<f64>,
    pub heog: Vec<f64>,
    pub blinks: Vec<EogEvent>,
    pub saccades: Vec<EogEvent>,
}

/// Raised-cosine bump of `len` samples peaking at `amplitude`.
pub(crate) fn blink_shape(len: usize, amplitude: f64) -> Vec<f64> {
    (0..len)
        .map(|t| amplitude * 0.5 * (1.0 - (2.0 * PI * (t as f64 + 0.5) / len as f64).cos()))
        .collect()
}

/// Rectangle of height `amplitude` with raised-cosine edges of up to 20 ms.
pub(crate) fn saccade_shape(len: usize, amplitude: f64, fs: f64) -> Vec<f64> {
    let ramp = ((0.02 * fs).round() as usize).clamp(1, (len / 4).max(1));
    (0..len)
        .map(|t| {
            let edge = t.min(len - 1 - t);
            if edge >= ramp {
                amplitude
            } else {
                amplitude * 0.5 * (1.0 - (PI * (edge as f64 + 0.5) / ramp as f64).cos())
            }
        })
        .collect()
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
}

pub(crate) fn ms_to_samples(ms: f64, fs: f64) -> usize {
    ((ms / 1000.0 * fs).round() as usize).max(1)
}

/// Places `count` non-overlapping events in `n` samples: onsets are drawn
/// uniformly, sorted, and pushed past the end of the previous event. Events
/// that no longer start inside the window are dropped.
fn place<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    count: usize,
    len_ms: (f64, f64),
    amp: (f64, f64),
    signed: bool,
    fs: f64,
) -> Vec<EogEvent> {
    let mut onsets: Vec<usize> = (0..count).map(|_| rng.random_range(0..n)).collect();
    onsets.sort_unstable();
    let mut out = Vec::with_capacity(count);
    let mut free_from = 0;
    for o in onsets {
        let len = ms_to_samples(rng.random_range(len_ms.0..len_ms.1), fs);
        let mut amplitude = rng.random_range(amp.0..amp.1);
        if signed && rng.random_bool(0.5) {
            amplitude = -amplitude;
        }
        let onset = o.max(free_from);
        if onset >= n {
            continue;
        }
        free_from = onset + len;
        out.push(EogEvent { onset, len, amplitude });
    }
    out
}

fn render(n: usize, events: &[EogEvent], shape: impl Fn(&EogEvent) -> Vec<f64>) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for e in events {
        for (k, v) in shape(e).into_iter().enumerate() {
            if let Some(slot) = x.get_mut(e.onset + k) {
                *slot += v;
            }
        }
    }
    x
}

/// Synthetic EOG: blinks (raised cosine, 200-400 ms, 100-400 μV) on VEOG and
/// saccades (smoothed rectangles, 300-800 ms, ±50-150 μV) on HEOG, each with
/// Poisson counts at the given per-minute rates.
pub fn gen_eog(
    seed: u64,
    seconds: f64,
    sample_rate: f64,
    rate_blinks: f64,
    rate_saccades: f64,
) -> Result<EogTraces> {
    if !(rate_blinks >= 0.0 && rate_saccades >= 0.0) {
        return Err(Error::Config("EOG event rates must be non-negative".into()));
    }
    if !(seconds >= 0.0 && sample_rate > 0.0) {
        return Err(Error::Config("EOG duration and sample rate".into()));
    }
    let n = (seconds * sample_rate).round() as usize;
    let minutes = seconds / 60.0;
    let mut rng = super::subject_rng(seed, 0);
    let nb = poisson_count(&mut rng, rate_blinks * minutes);
    let ns = poisson_count(&mut rng, rate_saccades * minutes);
    let (blinks, saccades) = if n == 0 {
        (Vec::new(), Vec::new())
    } else {
        (
            place(&mut rng, n, nb, (200.0, 400.0), (100.0, 400.0), false, sample_rate),
            place(&mut rng, n, ns, (300.0, 800.0), (50.0, 150.0), true, sample_rate),
        )
    };
    Ok(EogTraces {
        veog: render(n, &blinks, |e| blink_shape(e.len, e.amplitude)),
        heog: render(n, &saccades, |e| saccade_shape(e.len, e.amplitude, sample_rate)),
        blinks,
        saccades,
    })
}
