use serde::{Deserialize, Serialize};

use super::psd::{welch_psd, PsdEstimate, WelchConfig};
use crate::error::{Error, Result};
use crate::nn::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BandName {
    Delta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandDef {
    pub name: BandName,
    pub lo: f64,
    pub hi: f64,
}

pub const DEFAULT_BANDS: [BandDef; 5] = [
    BandDef { name: BandName::Delta, lo: 1.0, hi: 4.0 },
    BandDef { name: BandName::Theta, lo: 4.0, hi: 8.0 },
    BandDef { name: BandName::Alpha, lo: 8.0, hi: 13.0 },
    BandDef { name: BandName::Beta, lo: 13.0, hi: 30.0 },
    BandDef { name: BandName::Gamma, lo: 30.0, hi: 45.0 },
];

/// Checks ordering, positivity and the Nyquist bound.
pub fn validate_bands(bands: &[BandDef], fs: f64) -> Result<()> {
    let nyq = fs / 2.0;
    for (i, b) in bands.iter().enumerate() {
        if !(b.lo > 0.0 && b.lo < b.hi && b.hi <= nyq) {
            return Err(Error::Config(format!(
                "band {:?} {}-{} Hz invalid at Nyquist {nyq}",
                b.name, b.lo, b.hi
            )));
        }
        if i > 0 && bands[i - 1].hi > b.lo {
            return Err(Error::Config(format!("band {:?} overlaps its predecessor", b.name)));
        }
    }
    Ok(())
}

/// Absolute band power per (band, channel): the PSD integrated over
/// `lo <= f < hi` (the last band also includes its upper edge).
pub fn band_powers(psd: &PsdEstimate, bands: &[BandDef]) -> Matrix {
    let df = psd.resolution();
    let mut out = Matrix::zeros(bands.len(), psd.power.rows());
    for (bi, b) in bands.iter().enumerate() {
        let last = bi + 1 == bands.len();
        for (k, &f) in psd.freqs.iter().enumerate() {
            let inside = f >= b.lo && (f < b.hi || (last && f <= b.hi));
            if !inside {
                continue;
            }
            for c in 0..psd.power.rows() {
                let v = out.get(bi, c) + psd.power.get(c, k) * df;
                out.set(bi, c, v);
            }
        }
    }
    out
}

/// Relative band power `P[b][c]` of one epoch: band powers normalized to sum
/// to one over the bands for every channel. A channel with no power in any
/// band gets a uniform share.
pub fn relative_band_power(epoch: &Matrix, fs: f64, bands: &[BandDef]) -> Result<Matrix> {
    validate_bands(bands, fs)?;
    let psd = welch_psd(epoch, fs, &WelchConfig::default())?;
    let mut p = band_powers(&psd, bands);
    let uniform = 1.0 / bands.len() as f64;
    for c in 0..p.cols() {
        let total: f64 = (0..p.rows()).map(|b| p.get(b, c)).sum();
        for b in 0..p.rows() {
            let v = if total > 0.0 { p.get(b, c) / total } else { uniform };
            p.set(b, c, v);
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bands_are_valid() {
        validate_bands(&DEFAULT_BANDS, 200.0).unwrap();
        assert!(validate_bands(&DEFAULT_BANDS, 80.0).is_err());
    }

    #[test]
    fn zero_channel_is_uniform() {
        let p = relative_band_power(&Matrix::zeros(2, 500), 200.0, &DEFAULT_BANDS).unwrap();
        assert!(p.data().iter().all(|&v| v == 0.2));
    }
}
