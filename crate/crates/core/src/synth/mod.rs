//! Synthetic multi-channel EEG with labelled, paired artifact contamination.
//!
//! Every generator is a pure function of its spec and seed. Independent
//! random streams are derived per subject and per epoch, so results do not
//! depend on generation order.

mod dataset;
mod eog;
mod inject;

pub use dataset::{
    load_dataset, read_dataset, save_dataset, split_by_subject, write_dataset, DatasetRecord,
    EpochDataset, Label, Partition, SplitFractions, DATASET_MAGIC, DATASET_VERSION,
};
pub use eog::{contaminate_eog, eog_contribution, gen_eog, EogCoefficients, EogEvent, EogTraces};
pub use inject::{inject_artifacts, ArtifactKind, ArtifactRates};

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::signal::{
    bandpass, epoch_split, BandDef, BandName, Recording, CHANNEL_ROWS, DEFAULT_BANDS,
    STANDARD_CHANNELS,
};

/// Amplitude range (μV) of the oscillatory activity in one band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandAmplitude {
    pub band: BandDef,
    pub min_uv: f64,
    pub max_uv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_subjects: usize,
    pub seconds_per_subject: f64,
    pub sample_rate: f64,
    pub epoch_seconds: f64,
    pub band_amplitudes: Vec<BandAmplitude>,
    /// Exponent β of the 1/f^β background.
    pub pink_exponent: f64,
    /// RMS of the background noise in μV.
    pub pink_rms_uv: f64,
    pub mixing_seed: u64,
    pub rates: ArtifactRates,
    /// Probability that an injected artifact is also left in the target.
    pub uncorrected_fraction: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let amp = |i: usize, min_uv, max_uv| BandAmplitude {
            band: DEFAULT_BANDS[i],
            min_uv,
            max_uv,
        };
        Self {
            n_subjects: 10,
            seconds_per_subject: 120.0,
            sample_rate: 200.0,
            epoch_seconds: 2.0,
            band_amplitudes: vec![
                amp(0, 3.0, 8.0),
                amp(1, 2.0, 6.0),
                amp(2, 4.0, 10.0),
                amp(3, 1.0, 4.0),
                amp(4, 0.5, 2.0),
            ],
            pink_exponent: 1.0,
            pink_rms_uv: 3.0,
            mixing_seed: 0,
            rates: ArtifactRates::default(),
            uncorrected_fraction: 0.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let fs = self.sample_rate;
        if !(fs > 90.0) || !fs.is_finite() {
            return Err(Error::Config(format!(
                "sample rate {fs} Hz cannot carry the 1-45 Hz passband"
            )));
        }
        if self.n_subjects == 0 {
            return Err(Error::Config("n_subjects must be positive".into()));
        }
        if !(self.seconds_per_subject > 0.0 && self.epoch_seconds > 0.0) {
            return Err(Error::Config("durations must be positive".into()));
        }
        if (self.epoch_seconds * fs).round() < 1.0 {
            return Err(Error::Config(format!("epoch of {} s is empty", self.epoch_seconds)));
        }
        for a in &self.band_amplitudes {
            if !(a.min_uv >= 0.0 && a.min_uv <= a.max_uv && a.max_uv.is_finite()) {
                return Err(Error::Config(format!("amplitude range for {:?}", a.band.name)));
            }
            if !(a.band.lo > 0.0 && a.band.lo < a.band.hi && a.band.hi < fs / 2.0) {
                return Err(Error::Config(format!("band {:?} edges", a.band.name)));
            }
        }
        if !(self.pink_rms_uv >= 0.0 && self.pink_exponent.is_finite()) {
            return Err(Error::Config("pink noise parameters".into()));
        }
        if !(0.0..=1.0).contains(&self.uncorrected_fraction) {
            return Err(Error::Config(format!(
                "uncorrected_fraction {} outside [0, 1]",
                self.uncorrected_fraction
            )));
        }
        self.rates.validate()
    }

    pub fn samples_per_epoch(&self) -> usize {
        (self.epoch_seconds * self.sample_rate).round() as usize
    }
}

/// Sinusoids drawn per band and channel.
const COMPONENTS_PER_BAND: usize = 3;
/// Alpha gain on the occipital row.
const OCCIPITAL_ALPHA_GAIN: f64 = 2.0;
const OCCIPITAL_ROW: usize = 4;

pub(crate) fn subject_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Near-identity spatial mixing: unit diagonal, off-diagonal U(0, 0.2).
pub fn mixing_matrix(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, n, |i, j| {
        let u = rng.random_range(0.0..0.2);
        if i == j {
            1.0
        } else {
            u
        }
    })
}

/// Unit-RMS noise with power spectrum ∝ 1/f^β, shaped in the frequency domain.
pub fn pink_noise<R: Rng + ?Sized>(rng: &mut R, n: usize, beta: f64) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let mut spec = vec![rustfft::num_complex::Complex64::new(0.0, 0.0); n];
    for k in 1..=n / 2 {
        let gain = (k as f64).powf(-beta / 2.0);
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        spec[k] = rustfft::num_complex::Complex64::new(re * gain, im * gain);
        if k != n - k {
            spec[n - k] = spec[k].conj();
        } else {
            spec[k].im = 0.0;
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let x: Vec<f64> = spec.iter().map(|c| c.re).collect();
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        x.into_iter().map(|v| v / rms).collect()
    } else {
        x
    }
}

fn gen_sources<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R, n: usize) -> Matrix {
    let fs = spec.sample_rate;
    let nc = STANDARD_CHANNELS.len();
    let mut src = Matrix::zeros(nc, n);
    for c in 0..nc {
        let row = src.row_mut(c);
        for amp in &spec.band_amplitudes {
            let mut a = if amp.max_uv > amp.min_uv {
                rng.random_range(amp.min_uv..amp.max_uv)
            } else {
                amp.min_uv
            };
            if amp.band.name == BandName::Alpha && CHANNEL_ROWS[c] == OCCIPITAL_ROW {
                a *= OCCIPITAL_ALPHA_GAIN;
            }
            let w = a / (COMPONENTS_PER_BAND as f64).sqrt();
            for _ in 0..COMPONENTS_PER_BAND {
                let f = rng.random_range(amp.band.lo..amp.band.hi);
                let phase = rng.random_range(0.0..2.0 * PI);
                let fm = rng.random_range(0.05..0.3);
                let phase_m = rng.random_range(0.0..2.0 * PI);
                for (t, v) in row.iter_mut().enumerate() {
                    let s = t as f64 / fs;
                    let env = 1.0 + 0.5 * (2.0 * PI * fm * s + phase_m).sin();
                    *v += w * env * (2.0 * PI * f * s + phase).sin();
                }
            }
        }
        let noise = pink_noise(rng, n, spec.pink_exponent);
        for (v, e) in row.iter_mut().zip(noise) {
            *v += spec.pink_rms_uv * e;
        }
    }
    src
}

/// One clean recording per subject: band oscillations plus 1/f background,
/// spatially mixed, then bandpassed to 1-45 Hz.
pub fn gen_clean(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Recording>> {
    spec.validate()?;
    let n = (spec.seconds_per_subject * spec.sample_rate).round() as usize;
    let nc = STANDARD_CHANNELS.len();
    let mix = mixing_matrix(nc, spec.mixing_seed);
    (0..spec.n_subjects)
        .map(|s| {
            let mut rng = subject_rng(seed, s as u64);
            let src = gen_sources(spec, &mut rng, n);
            let mut data = Matrix::zeros(nc, n);
            for i in 0..nc {
                for j in 0..nc {
                    let m = mix.get(i, j);
                    crate::nn::axpy(m, src.row(j), data.row_mut(i));
                }
            }
            let rec = Recording::new(s as u32, spec.sample_rate, Recording::standard_labels(), data)?;
            bandpass(&rec, 1.0, 45.0)
        })
        .collect()
}

/// Clean recordings, epoched, artifact-injected and split 60/20/20 by subject.
pub fn generate_dataset(spec: &SyntheticSpec, seed: u64) -> Result<EpochDataset> {
    let recs = gen_clean(spec, seed)?;
    let mut epochs = Vec::new();
    for r in &recs {
        epochs.extend(epoch_split(r, spec.epoch_seconds)?);
    }
    if epochs.is_empty() {
        return Err(Error::Config("recordings are shorter than one epoch".into()));
    }
    let mut ds = inject_artifacts(&epochs, spec, seed ^ 0x9E37_79B9_7F4A_7C15)?;
    ds.spec = Some(spec.clone());
    split_by_subject(&ds, SplitFractions::default(), seed)
}
