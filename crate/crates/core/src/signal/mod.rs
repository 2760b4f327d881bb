//! Signal conditioning and spectral measures for multi-channel EEG.

mod bands;
mod filter;
mod psd;

pub use bands::{band_powers, relative_band_power, validate_bands, BandDef, BandName, DEFAULT_BANDS};
pub use filter::{Biquad, Sos};
pub use psd::{welch_psd, PsdEstimate, WelchConfig};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_dims, Error, Result};
use crate::nn::Matrix;

/// The 19 channels of the 10-20 montage, in storage order.
pub const STANDARD_CHANNELS: [&str; 19] = [
    "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T3", "C3", "Cz", "C4", "T4", "T5", "P3", "Pz",
    "P4", "T6", "O1", "O2",
];

/// Flat scalp coordinates (x to the right, y towards the nose), unit radius.
pub const CHANNEL_POSITIONS: [(f64, f64); 19] = [
    (-0.31, 0.95),
    (0.31, 0.95),
    (-0.81, 0.59),
    (-0.40, 0.55),
    (0.0, 0.50),
    (0.40, 0.55),
    (0.81, 0.59),
    (-1.0, 0.0),
    (-0.50, 0.0),
    (0.0, 0.0),
    (0.50, 0.0),
    (1.0, 0.0),
    (-0.81, -0.59),
    (-0.40, -0.55),
    (0.0, -0.50),
    (0.40, -0.55),
    (0.81, -0.59),
    (-0.31, -0.95),
    (0.31, -0.95),
];

/// Anterior-posterior row of each standard channel (0 = Fp, 4 = O).
pub const CHANNEL_ROWS: [usize; 19] = [0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4];

pub fn channel_index(label: &str) -> Option<usize> {
    STANDARD_CHANNELS.iter().position(|&c| c == label)
}

/// Continuous multi-channel recording, channels × samples, in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: u32,
    pub sample_rate: f64,
    pub channels: Vec<String>,
    pub data: Matrix,
}

impl Recording {
    pub fn new(subject_id: u32, sample_rate: f64, channels: Vec<String>, data: Matrix) -> Result<Self> {
        ensure_dims!(
            channels.len() == data.rows(),
            "{} channel labels for {} data rows",
            channels.len(),
            data.rows()
        );
        let mut seen = std::collections::HashSet::new();
        if !channels.iter().all(|c| seen.insert(c)) {
            return Err(Error::Config("duplicate channel label".into()));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::Config(format!("sample rate {sample_rate}")));
        }
        Ok(Self {
            subject_id,
            sample_rate,
            channels,
            data,
        })
    }

    pub fn standard_labels() -> Vec<String> {
        STANDARD_CHANNELS.iter().map(|s| s.to_string()).collect()
    }

    pub fn n_samples(&self) -> usize {
        self.data.cols()
    }

    pub fn duration(&self) -> f64 {
        self.n_samples() as f64 / self.sample_rate
    }

    fn map_channels(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Matrix> {
        let rows: Vec<Vec<f64>> = (0..self.data.rows()).map(|c| f(self.data.row(c))).collect();
        Matrix::from_rows(&rows)
    }
}

/// Prototype order of the bandpass; the realized filter has twice as many poles.
pub const BANDPASS_PROTOTYPE_ORDER: usize = 8;

/// Zero-phase Butterworth bandpass, applied per channel.
pub fn bandpass(rec: &Recording, lo: f64, hi: f64) -> Result<Recording> {
    let sos = Sos::butter_bandpass(BANDPASS_PROTOTYPE_ORDER, lo, hi, rec.sample_rate)?;
    Ok(Recording {
        data: rec.map_channels(|x| sos.filtfilt(x))?,
        ..rec.clone()
    })
}

/// Anti-aliased integer decimation to `target_hz`.
pub fn downsample(rec: &Recording, target_hz: f64) -> Result<Recording> {
    let ratio = rec.sample_rate / target_hz;
    let factor = ratio.round();
    if !(target_hz > 0.0) || factor < 1.0 || (ratio - factor).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "cannot downsample {} Hz to {target_hz} Hz: ratio is not an integer",
            rec.sample_rate
        )));
    }
    let factor = factor as usize;
    if factor == 1 {
        return Ok(rec.clone());
    }
    let sos = Sos::butter_lowpass(8, 0.4 * target_hz, rec.sample_rate)?;
    let data = rec.map_channels(|x| sos.filtfilt(x).into_iter().step_by(factor).collect())?;
    Ok(Recording {
        sample_rate: target_hz,
        data,
        ..rec.clone()
    })
}

/// A fixed-length multi-channel segment tagged with its subject.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub subject_id: u32,
    pub data: Matrix,
}

/// Non-overlapping epochs of `seconds` length; the incomplete tail is dropped.
pub fn epoch_split(rec: &Recording, seconds: f64) -> Result<Vec<Epoch>> {
    let len = (seconds * rec.sample_rate).round() as usize;
    if len == 0 {
        return Err(Error::Config(format!("epoch length {seconds} s is empty")));
    }
    let count = rec.n_samples() / len;
    Ok((0..count)
        .map(|e| Epoch {
            subject_id: rec.subject_id,
            data: Matrix::from_fn(rec.data.rows(), len, |c, t| rec.data.get(c, e * len + t)),
        })
        .collect())
}

/// Root mean square of the elementwise difference.
pub fn rmse(a: &Matrix, b: &Matrix) -> Result<f64> {
    Ok(crate::nn::mse(a, b)?.sqrt())
}

/// Output/input PSD ratio in dB per frequency bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttenuationCurve {
    pub freqs: Vec<f64>,
    pub db: Vec<f64>,
}

impl AttenuationCurve {
    /// Mean attenuation over bins with `lo <= f <= hi`.
    pub fn mean_between(&self, lo: f64, hi: f64) -> f64 {
        let sel: Vec<f64> = self
            .freqs
            .iter()
            .zip(&self.db)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .map(|(_, d)| *d)
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    }
}

/// Floor added to both PSD means so silent bins compare as 0 dB.
const ATTENUATION_FLOOR: f64 = 1e-30;

/// `10 log10(mean PSD_out / mean PSD_in)` with means over channels and epochs.
pub fn psd_attenuation(inputs: &[Matrix], outputs: &[Matrix], fs: f64) -> Result<AttenuationCurve> {
    ensure_dims!(
        inputs.len() == outputs.len() && !inputs.is_empty(),
        "{} inputs vs {} outputs",
        inputs.len(),
        outputs.len()
    );
    let cfg = WelchConfig::default();
    let mut freqs = Vec::new();
    let mut sum_in: Vec<f64> = Vec::new();
    let mut sum_out: Vec<f64> = Vec::new();
    for (x, y) in inputs.iter().zip(outputs) {
        ensure_dims!(x.shape() == y.shape(), "input {:?} vs output {:?}", x.shape(), y.shape());
        let pin = welch_psd(x, fs, &cfg)?;
        let pout = welch_psd(y, fs, &cfg)?;
        if sum_in.is_empty() {
            freqs = pin.freqs.clone();
            sum_in = vec![0.0; freqs.len()];
            sum_out = vec![0.0; freqs.len()];
        }
        ensure_dims!(pin.freqs.len() == freqs.len(), "epochs of differing length");
        for c in 0..x.rows() {
            for k in 0..freqs.len() {
                sum_in[k] += pin.power.get(c, k);
                sum_out[k] += pout.power.get(c, k);
            }
        }
    }
    let db = sum_in
        .iter()
        .zip(&sum_out)
        .map(|(i, o)| 10.0 * ((o + ATTENUATION_FLOOR) / (i + ATTENUATION_FLOOR)).log10())
        .collect();
    Ok(AttenuationCurve { freqs, db })
}

/// Per-epoch z-scoring: channel means removed, then one scale for the whole
/// epoch divided out. The scale is the median of the per-channel standard
/// deviations, so a few channels carrying a large transient do not shrink
/// the others. Falls back to the pooled deviation, then to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochScale {
    pub means: Vec<f64>,
    pub scale: f64,
}

impl EpochScale {
    pub fn fit(x: &Matrix) -> Self {
        let t = x.cols().max(1) as f64;
        let means: Vec<f64> = (0..x.rows()).map(|c| x.row(c).iter().sum::<f64>() / t).collect();
        let mut sds: Vec<f64> = means
            .iter()
            .enumerate()
            .map(|(c, m)| (x.row(c).iter().map(|v| (v - m) * (v - m)).sum::<f64>() / t).sqrt())
            .collect();
        let pooled = (sds.iter().map(|s| s * s).sum::<f64>() / sds.len().max(1) as f64).sqrt();
        sds.sort_by(f64::total_cmp);
        let n = sds.len();
        let median = match n {
            0 => 0.0,
            _ if n % 2 == 1 => sds[n / 2],
            _ => (sds[n / 2 - 1] + sds[n / 2]) / 2.0,
        };
        let scale = [median, pooled]
            .into_iter()
            .find(|s| *s > 0.0 && s.is_finite())
            .unwrap_or(1.0);
        Self { means, scale }
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        ensure_dims!(x.rows() == self.means.len(), "scale fitted on {} channels", self.means.len());
        Ok(Matrix::from_fn(x.rows(), x.cols(), |c, t| (x.get(c, t) - self.means[c]) / self.scale))
    }

    pub fn invert(&self, y: &Matrix) -> Result<Matrix> {
        ensure_dims!(y.rows() == self.means.len(), "scale fitted on {} channels", self.means.len());
        Ok(Matrix::from_fn(y.rows(), y.cols(), |c, t| y.get(c, t) * self.scale + self.means[c]))
    }

    /// Linear blend `(1-λ)·self + λ·other`.
    pub fn lerp(&self, other: &EpochScale, lambda: f64) -> EpochScale {
        EpochScale {
            means: self
                .means
                .iter()
                .zip(&other.means)
                .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
                .collect(),
            scale: (1.0 - lambda) * self.scale + lambda * other.scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(fs: f64, secs: f64) -> Recording {
        let n = (fs * secs).round() as usize;
        let data = Matrix::from_fn(2, n, |c, t| ((t as f64) * 0.01 + c as f64).sin());
        Recording::new(3, fs, vec!["A".into(), "B".into()], data).unwrap()
    }

    #[test]
    fn epoch_counts() {
        assert_eq!(epoch_split(&rec(200.0, 960.0), 2.0).unwrap().len(), 480);
        assert_eq!(epoch_split(&rec(200.0, 3.5), 2.0).unwrap().len(), 1);
        assert_eq!(epoch_split(&rec(200.0, 1.9), 2.0).unwrap().len(), 0);
        let e = epoch_split(&rec(200.0, 4.0), 2.0).unwrap();
        assert_eq!(e[1].subject_id, 3);
        assert_eq!(e[1].data.get(1, 0), rec(200.0, 4.0).data.get(1, 400));
    }

    #[test]
    fn downsample_ratios() {
        let r = rec(400.0, 2.0);
        assert_eq!(downsample(&r, 200.0).unwrap().n_samples(), 400);
        let r = rec(200.0, 2.0);
        assert_eq!(downsample(&r, 200.0).unwrap(), r);
        let r = rec(1000.0, 2.0);
        let d = downsample(&r, 200.0).unwrap();
        assert_eq!(d.n_samples(), 400);
        let sos = Sos::butter_lowpass(8, 80.0, 1000.0).unwrap();
        let filtered = sos.filtfilt(r.data.row(0));
        assert_eq!(d.data.get(0, 7), filtered[35]);
        assert!(matches!(downsample(&rec(250.0, 1.0), 200.0), Err(Error::Config(_))));
    }

    #[test]
    fn rmse_basics() {
        let x = Matrix::from_fn(3, 10, |r, c| (r * c) as f64);
        assert_eq!(rmse(&x, &x).unwrap(), 0.0);
        assert!((rmse(&x, &x.map(|v| v + 2.5)).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn identity_attenuation_is_zero() {
        let x: Vec<Matrix> = (0..3)
            .map(|k| Matrix::from_fn(2, 500, |c, t| ((t * (k + 1) + c) as f64 * 0.37).sin()))
            .collect();
        let a = psd_attenuation(&x, &x, 200.0).unwrap();
        assert!(a.db.iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn epoch_scale_round_trip() {
        let x = Matrix::from_fn(3, 50, |c, t| 10.0 * c as f64 + (t as f64).cos() * (c + 1) as f64);
        let s = EpochScale::fit(&x);
        let z = s.apply(&x).unwrap();
        for c in 0..3 {
            assert!(z.row(c).iter().sum::<f64>().abs() < 1e-12);
        }
        let sd1 = (z.row(1).iter().map(|v| v * v).sum::<f64>() / 50.0).sqrt();
        assert!((sd1 - 1.0).abs() < 1e-12, "median channel has unit deviation");
        let back = s.invert(&z).unwrap();
        assert!(back.sub(&x).unwrap().max_abs() < 1e-12);
        assert_eq!(EpochScale::fit(&Matrix::zeros(2, 4)).scale, 1.0);
    }

    #[test]
    fn epoch_scale_ignores_a_single_loud_channel() {
        let quiet = |t: usize| (t as f64 * 0.3).sin();
        let x = Matrix::from_fn(5, 64, |c, t| if c == 0 { 1000.0 * quiet(t) } else { quiet(t) });
        let base = Matrix::from_fn(5, 64, |_, t| quiet(t));
        assert!((EpochScale::fit(&x).scale - EpochScale::fit(&base).scale).abs() < 1e-12);
        let mostly_flat = Matrix::from_fn(3, 8, |c, t| if c == 0 { t as f64 } else { 0.0 });
        assert!(EpochScale::fit(&mostly_flat).scale > 0.0);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(Recording::new(0, 200.0, vec!["A".into(), "A".into()], Matrix::zeros(2, 3)).is_err());
    }
}
