use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{DatasetRecord, EpochDataset, Label};
use super::eog::{blink_shape, eog_contribution, ms_to_samples, poisson_count, saccade_shape};
use super::{subject_rng, EogCoefficients, SyntheticSpec};
use crate::error::{ensure_dims, Error, Result};
use crate::nn::Matrix;
use crate::signal::{Epoch, Sos, CHANNEL_POSITIONS, STANDARD_CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactKind {
    Blink,
    Saccade,
    Muscle,
    Jump,
}

/// Expected events per minute of each artifact type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArtifactRates {
    pub blink: f64,
    pub saccade: f64,
    pub muscle: f64,
    pub jump: f64,
}

impl Default for ArtifactRates {
    fn default() -> Self {
        Self {
            blink: 12.0,
            saccade: 6.0,
            muscle: 6.0,
            jump: 2.0,
        }
    }
}

impl ArtifactRates {
    pub fn zero() -> Self {
        Self {
            blink: 0.0,
            saccade: 0.0,
            muscle: 0.0,
            jump: 0.0,
        }
    }

    pub fn only(kind: ArtifactKind, rate: f64) -> Self {
        let mut r = Self::zero();
        match kind {
            ArtifactKind::Blink => r.blink = rate,
            ArtifactKind::Saccade => r.saccade = rate,
            ArtifactKind::Muscle => r.muscle = rate,
            ArtifactKind::Jump => r.jump = rate,
        }
        r
    }

    pub fn get(&self, kind: ArtifactKind) -> f64 {
        match kind {
            ArtifactKind::Blink => self.blink,
            ArtifactKind::Saccade => self.saccade,
            ArtifactKind::Muscle => self.muscle,
            ArtifactKind::Jump => self.jump,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for k in ArtifactKind::ALL {
            let r = self.get(k);
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("{k:?} rate {r}")));
            }
        }
        Ok(())
    }
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 4] = [Self::Blink, Self::Saccade, Self::Muscle, Self::Jump];
}

fn channel_rms(row: &[f64]) -> f64 {
    let n = row.len().max(1) as f64;
    let m = row.iter().sum::<f64>() / n;
    (row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt()
}

/// Channel `center` and its `k - 1` nearest neighbours on the scalp.
fn neighbourhood(center: usize, k: usize) -> Vec<usize> {
    let (cx, cy) = CHANNEL_POSITIONS[center];
    let mut idx: Vec<usize> = (0..CHANNEL_POSITIONS.len()).collect();
    idx.sort_by(|&i, &j| {
        let d = |c: usize| {
            let (x, y) = CHANNEL_POSITIONS[c];
            (x - cx).powi(2) + (y - cy).powi(2)
        };
        d(i).total_cmp(&d(j)).then(i.cmp(&j))
    });
    idx.truncate(k);
    idx
}

struct Injector<'a> {
    fs: f64,
    clean: &'a Matrix,
    coeffs: EogCoefficients,
    muscle_band: Sos,
}

impl Injector<'_> {
    fn draw<R: Rng + ?Sized>(&self, kind: ArtifactKind, rng: &mut R) -> Result<Matrix> {
        let (nc, n) = self.clean.shape();
        let mut delta = Matrix::zeros(nc, n);
        match kind {
            ArtifactKind::Blink | ArtifactKind::Saccade => {
                let (len_ms, amp) = if kind == ArtifactKind::Blink {
                    (rng.random_range(200.0..400.0), rng.random_range(100.0..400.0))
                } else {
                    let sign = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                    (rng.random_range(300.0..800.0), sign * rng.random_range(50.0..150.0))
                };
                let len = ms_to_samples(len_ms, self.fs).min(n);
                let onset = rng.random_range(0..=n - len);
                let shape = if kind == ArtifactKind::Blink {
                    blink_shape(len, amp)
                } else {
                    saccade_shape(len, amp, self.fs)
                };
                let mut trace = vec![0.0; n];
                trace[onset..onset + len].copy_from_slice(&shape);
                let zero = vec![0.0; n];
                delta = if kind == ArtifactKind::Blink {
                    eog_contribution(&trace, &zero, &self.coeffs)?
                } else {
                    eog_contribution(&zero, &trace, &self.coeffs)?
                };
            }
            ArtifactKind::Muscle => {
                let len = ms_to_samples(rng.random_range(250.0..500.0), self.fs).min(n);
                let onset = rng.random_range(0..=n - len);
                let gain = rng.random_range(3.0..8.0);
                let k = rng.random_range(3..=7);
                let center = rng.random_range(0..nc);
                let taper = blink_shape(len, 1.0);
                for c in neighbourhood(center, k) {
                    let white: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
                    let band = self.muscle_band.filtfilt(&white);
                    let burst: Vec<f64> =
                        (0..len).map(|t| band[onset + t] * taper[t]).collect();
                    let rms = channel_rms(&burst).max(f64::MIN_POSITIVE);
                    let scale = gain * channel_rms(self.clean.row(c)) / rms;
                    for (t, v) in burst.iter().enumerate() {
                        delta.set(c, onset + t, v * scale);
                    }
                }
            }
            ArtifactKind::Jump => {
                let amp = rng.random_range(200.0..1000.0);
                let sign = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                let onset = rng.random_range(n / 10..(9 * n / 10).max(n / 10 + 1));
                let k = rng.random_range(1..=2);
                for c in sample(rng, nc, k) {
                    for t in onset..n {
                        delta.set(c, t, sign * amp);
                    }
                }
            }
        }
        Ok(delta)
    }
}

/// Adds Poisson-distributed blink, saccade, muscle and jump artifacts to each
/// epoch. The pre-injection epoch becomes the paired target, except for
/// artifacts selected (with probability `uncorrected_fraction`) to remain in
/// the target as well. An epoch is labelled noisy exactly when its input and
/// target differ.
pub fn inject_artifacts(epochs: &[Epoch], spec: &SyntheticSpec, seed: u64) -> Result<EpochDataset> {
    spec.rates.validate()?;
    if !(0.0..=1.0).contains(&spec.uncorrected_fraction) {
        return Err(Error::Config("uncorrected_fraction outside [0, 1]".into()));
    }
    let fs = spec.sample_rate;
    let nc = STANDARD_CHANNELS.len();
    let shape = epochs.first().map(|e| e.data.shape()).unwrap_or((nc, 0));
    let muscle_band = Sos::butter_bandpass(4, 20.0, 45.0, fs)?;
    let mut records = Vec::with_capacity(epochs.len());
    for (i, ep) in epochs.iter().enumerate() {
        ensure_dims!(
            ep.data.shape() == shape && shape.0 == nc,
            "epoch {i} has shape {:?}, expected ({nc}, {})",
            ep.data.shape(),
            shape.1
        );
        let mut rng = subject_rng(seed, i as u64);
        let inj = Injector {
            fs,
            clean: &ep.data,
            coeffs: EogCoefficients::standard(),
            muscle_band: muscle_band.clone(),
        };
        let minutes = shape.1 as f64 / fs / 60.0;
        let mut input = ep.data.clone();
        let mut target = ep.data.clone();
        let mut artifacts = Vec::new();
        for kind in ArtifactKind::ALL {
            let count = poisson_count(&mut rng, spec.rates.get(kind) * minutes);
            for _ in 0..count {
                if shape.1 == 0 {
                    continue;
                }
                let delta = inj.draw(kind, &mut rng)?;
                input = input.add(&delta)?;
                if rng.random::<f64>() < spec.uncorrected_fraction {
                    target = target.add(&delta)?;
                }
                artifacts.push(kind);
            }
        }
        let label = if input == target { Label::Clean } else { Label::Noisy };
        records.push(DatasetRecord {
            subject_id: ep.subject_id,
            input,
            target: Some(target),
            label,
            partition: None,
            artifacts,
        });
    }
    Ok(EpochDataset {
        sample_rate: fs,
        channels: STANDARD_CHANNELS.iter().map(|s| s.to_string()).collect(),
        spec: None,
        records,
    })
}
