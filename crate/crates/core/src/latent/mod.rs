//! Latent-space interpretability: cumulative activations and the most
//! activated dimensions (MADs), spectral and temporal activation maps, and
//! decoded interpolation paths between two epochs.
//!
//! Encodings are always computed in eval mode.

mod export;

pub use export::{activation_csv, interpolation_csv, spectral_csv, topomap_csv, topomap_svg};

use crate::error::{ensure_dims, Error, Result};
use crate::model::LsteegModel;
use crate::nn::{mse, Matrix};
use crate::signal::{relative_band_power, BandDef};

/// Latent codes of `epochs`, one row per epoch.
pub fn encodings(model: &LsteegModel, epochs: &[Matrix]) -> Result<Matrix> {
    let rows = epochs.iter().map(|x| model.embed(x)).collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, model.config().n_latent));
    }
    Matrix::from_rows(&rows)
}

/// Cumulative activation `A_j = Σ_e |f_E^j(x_e)|` per latent dimension and
/// the dimensions ranked by it.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSummary {
    pub activation: Vec<f64>,
    /// Every dimension by descending activation, ties by ascending index.
    pub mads: Vec<usize>,
}

impl ActivationSummary {
    pub fn new(activation: Vec<f64>) -> Self {
        let mut mads: Vec<usize> = (0..activation.len()).collect();
        mads.sort_by(|&i, &j| activation[j].total_cmp(&activation[i]).then(i.cmp(&j)));
        Self { activation, mads }
    }

    pub fn from_encodings(z: &Matrix) -> Self {
        let mut a = vec![0.0; z.cols()];
        for e in 0..z.rows() {
            for (acc, v) in a.iter_mut().zip(z.row(e)) {
                *acc += v.abs();
            }
        }
        Self::new(a)
    }
}

pub fn cumulative_activation(model: &LsteegModel, epochs: &[Matrix]) -> Result<ActivationSummary> {
    Ok(ActivationSummary::from_encodings(&encodings(model, epochs)?))
}

/// The `k` most activated dimensions.
pub fn mads(summary: &ActivationSummary, k: usize) -> Result<Vec<usize>> {
    if k > summary.activation.len() {
        return Err(Error::Config(format!(
            "asked for {k} MADs of a {}-dimensional latent space",
            summary.activation.len()
        )));
    }
    Ok(summary.mads[..k].to_vec())
}

/// `S^j_{b,c} = Σ_e P_{b,c,e} f_E^j(x_e)` with `P` the relative band power.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralActivationMap {
    pub bands: Vec<BandDef>,
    /// One bands × channels matrix per latent dimension.
    pub maps: Vec<Matrix>,
}

impl SpectralActivationMap {
    pub fn get(&self, dim: usize, band: usize, channel: usize) -> f64 {
        self.maps[dim].get(band, channel)
    }

    /// From precomputed encodings (epochs × dims) and per-epoch band powers
    /// (bands × channels each).
    pub fn from_parts(z: &Matrix, powers: &[Matrix], bands: &[BandDef]) -> Result<Self> {
        ensure_dims!(
            z.rows() == powers.len(),
            "{} encodings for {} band-power maps",
            z.rows(),
            powers.len()
        );
        let shape = powers.first().map(|p| p.shape()).unwrap_or((bands.len(), 0));
        ensure_dims!(shape.0 == bands.len(), "band powers have {} rows for {} bands", shape.0, bands.len());
        let mut maps = vec![Matrix::zeros(shape.0, shape.1); z.cols()];
        for (e, p) in powers.iter().enumerate() {
            ensure_dims!(p.shape() == shape, "band-power map {e} has shape {:?}", p.shape());
            for (j, m) in maps.iter_mut().enumerate() {
                crate::nn::axpy(z.get(e, j), p.data(), m.data_mut());
            }
        }
        Ok(Self {
            bands: bands.to_vec(),
            maps,
        })
    }
}

pub fn spectral_activation(
    model: &LsteegModel,
    epochs: &[Matrix],
    fs: f64,
    bands: &[BandDef],
) -> Result<SpectralActivationMap> {
    let z = encodings(model, epochs)?;
    let powers = epochs
        .iter()
        .map(|x| relative_band_power(x, fs, bands))
        .collect::<Result<Vec<_>>>()?;
    SpectralActivationMap::from_parts(&z, &powers, bands)
}

/// `α^j = Σ_e x_e f_E^j(x_e)`: an epoch-shaped, encoding-weighted sum.
///
/// Epochs that are not time-locked to a common event interfere
/// destructively in this sum, so the map is only meaningful for aligned
/// data.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalActivation {
    pub dim: usize,
    pub alpha: Matrix,
}

impl TemporalActivation {
    pub fn from_parts(epochs: &[Matrix], z: &Matrix, dim: usize) -> Result<Self> {
        ensure_dims!(z.rows() == epochs.len(), "{} encodings for {} epochs", z.rows(), epochs.len());
        if dim >= z.cols() {
            return Err(Error::Config(format!("dimension {dim} outside latent size {}", z.cols())));
        }
        let shape = epochs.first().map(|x| x.shape()).unwrap_or((0, 0));
        let mut alpha = Matrix::zeros(shape.0, shape.1);
        for (e, x) in epochs.iter().enumerate() {
            ensure_dims!(x.shape() == shape, "epoch {e} has shape {:?}", x.shape());
            crate::nn::axpy(z.get(e, dim), x.data(), alpha.data_mut());
        }
        Ok(Self { dim, alpha })
    }
}

pub fn temporal_activation(model: &LsteegModel, epochs: &[Matrix], dim: usize) -> Result<TemporalActivation> {
    TemporalActivation::from_parts(epochs, &encodings(model, epochs)?, dim)
}

/// Decoded straight-line path between two latent codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    /// `0, 1/M, …, 1`: the λ = 0 entry is prepended to the M steps.
    pub lambdas: Vec<f64>,
    pub latents: Vec<Vec<f64>>,
    /// Decoded epochs, in the units of the inputs.
    pub decoded: Vec<Matrix>,
}

impl Interpolation {
    /// MSE between consecutive decoded epochs.
    pub fn step_mse(&self) -> Result<Vec<f64>> {
        self.decoded.windows(2).map(|w| mse(&w[0], &w[1])).collect()
    }
}

/// `z_m = (1 - λ_m) f_E(x_a) + λ_m f_E(x_b)` with `λ_m = m / M`, each decoded.
/// When the model normalizes, outputs are mapped back with the same blend
/// of the two epochs' scales.
pub fn interpolate(model: &LsteegModel, x_a: &Matrix, x_b: &Matrix, steps: usize) -> Result<Interpolation> {
    if steps == 0 {
        return Err(Error::Config("interpolation needs at least one step".into()));
    }
    let (na, sa) = model.prepare(x_a)?;
    let (nb, sb) = model.prepare(x_b)?;
    let za = model.encode(&na)?;
    let zb = model.encode(&nb)?;
    let mut out = Interpolation {
        lambdas: Vec::with_capacity(steps + 1),
        latents: Vec::with_capacity(steps + 1),
        decoded: Vec::with_capacity(steps + 1),
    };
    for m in 0..=steps {
        let lambda = m as f64 / steps as f64;
        let z: Vec<f64> = za
            .iter()
            .zip(&zb)
            .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
            .collect();
        let y = model.decode(&z)?;
        let y = match (&sa, &sb) {
            (Some(a), Some(b)) => a.lerp(b, lambda).invert(&y)?,
            _ => y,
        };
        out.lambdas.push(lambda);
        out.latents.push(z);
        out.decoded.push(y);
    }
    Ok(out)
}
