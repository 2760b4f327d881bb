use serde::{Deserialize, Serialize};

use super::train::{pair_loss, train, training_pairs, TrainConfig, TrainHistory};
use crate::error::{Error, Result};
use crate::model::{LsteegConfig, LsteegModel};
use crate::nn::{mse, Matrix};
use crate::signal::{psd_attenuation, rmse, AttenuationCurve};
use crate::synth::{EpochDataset, Partition};

/// Anything that maps an epoch to a reconstruction of the same shape.
pub trait EpochMap {
    /// Output in the units of `x`.
    fn reconstruct(&self, x: &Matrix) -> Result<Matrix>;

    /// Anomaly score: reconstruction MSE.
    fn score(&self, x: &Matrix) -> Result<f64> {
        mse(&self.reconstruct(x)?, x)
    }
}

impl EpochMap for LsteegModel {
    fn reconstruct(&self, x: &Matrix) -> Result<Matrix> {
        LsteegModel::reconstruct(self, x)
    }

    /// MSE between the normalized epoch and the network output (plain
    /// μV MSE when the model does not normalize).
    fn score(&self, x: &Matrix) -> Result<f64> {
        let (xn, _) = self.prepare(x)?;
        mse(&self.forward(&xn)?, &xn)
    }
}

impl<F: Fn(&Matrix) -> Result<Matrix>> EpochMap for F {
    fn reconstruct(&self, x: &Matrix) -> Result<Matrix> {
        self(x)
    }
}

/// Per-epoch reconstruction error in eval mode.
pub fn detect_scores<M: EpochMap + ?Sized>(model: &M, epochs: &[Matrix]) -> Result<Vec<f64>> {
    epochs.iter().map(|x| model.score(x)).collect()
}

/// RMSE between corrected output and target, per epoch and summarized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSummary {
    pub per_epoch: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
}

impl CorrectionSummary {
    pub fn from_values(per_epoch: Vec<f64>) -> Self {
        let n = per_epoch.len().max(1) as f64;
        let mean = per_epoch.iter().sum::<f64>() / n;
        let var = per_epoch.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            per_epoch,
            mean,
            sd: var.sqrt(),
        }
    }
}

pub fn evaluate_correction<M: EpochMap + ?Sized>(
    model: &M,
    pairs: &[(Matrix, Matrix)],
) -> Result<CorrectionSummary> {
    if pairs.is_empty() {
        return Err(Error::Config("no test pairs to evaluate".into()));
    }
    let per = pairs
        .iter()
        .map(|(x, y)| rmse(&model.reconstruct(x)?, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrectionSummary::from_values(per))
}

/// RMSE of leaving every input unchanged.
pub fn identity_baseline(pairs: &[(Matrix, Matrix)]) -> Result<CorrectionSummary> {
    evaluate_correction(&|x: &Matrix| Ok(x.clone()), pairs)
}

/// Raw-unit (input, target) pairs of one partition; a missing target stands
/// for the input.
pub fn test_pairs(ds: &EpochDataset, partition: Partition) -> Vec<(Matrix, Matrix)> {
    ds.partition(partition)
        .map(|r| (r.input.clone(), r.target_or_input().clone()))
        .collect()
}

/// Attenuation of the reconstruction relative to its input, per frequency.
pub fn evaluate_psd<M: EpochMap + ?Sized>(model: &M, epochs: &[Matrix], fs: f64) -> Result<AttenuationCurve> {
    let outs = epochs
        .iter()
        .map(|x| model.reconstruct(x))
        .collect::<Result<Vec<_>>>()?;
    psd_attenuation(epochs, &outs, fs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "n_latent")]
    Latent,
    #[serde(rename = "n_outer")]
    Outer,
    #[serde(rename = "n_inner")]
    Inner,
}

impl SweepAxis {
    pub fn apply(&self, base: &LsteegConfig, value: usize) -> LsteegConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::Latent => c.n_latent = value,
            SweepAxis::Outer => c.n_outer = value,
            SweepAxis::Inner => c.n_inner = value,
        }
        c
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Latent => "n_latent",
            SweepAxis::Outer => "n_outer",
            SweepAxis::Inner => "n_inner",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    /// Mean test-partition MSE in the network's working space.
    pub test_mse: f64,
    pub history: TrainHistory,
}

/// Trains one model per distinct value (ascending) with identical seeds and
/// budget, and reports each model's test loss.
pub fn sweep(
    axis: SweepAxis,
    values: &[usize],
    base: &LsteegConfig,
    train_cfg: &TrainConfig,
    ds: &EpochDataset,
) -> Result<Vec<SweepRow>> {
    let mut vals = values.to_vec();
    vals.sort_unstable();
    vals.dedup();
    if vals.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    vals.into_iter()
        .map(|v| {
            let model = LsteegModel::build(&axis.apply(base, v))?;
            let test = training_pairs(&model, ds, Partition::Test, train_cfg.mode)?;
            if test.is_empty() {
                return Err(Error::Config("Test partition has no usable epochs".into()));
            }
            let (trained, history) = train(&model, ds, train_cfg)?;
            Ok(SweepRow {
                value: v,
                test_mse: pair_loss(&trained, &test)?,
                history,
            })
        })
        .collect()
}
