use std::path::{Path, PathBuf};

use lsteeg_core::model::LsteegConfig;
use lsteeg_core::pipeline::{SweepAxis, ThresholdMethod, TrainConfig};
use lsteeg_core::signal::{BandDef, DEFAULT_BANDS};
use lsteeg_core::synth::{Partition, SyntheticSpec};
use lsteeg_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Everything a run can be configured with. Sections a command does not use
/// are ignored by it but still validated for unknown keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub synth: SyntheticSpec,
    pub model: LsteegConfig,
    pub train: TrainConfig,
    pub bands: Vec<BandDef>,
    pub detect: DetectSection,
    pub correct: CorrectSection,
    pub analyze: AnalyzeSection,
    pub sweep: SweepSection,
    pub psd: PsdSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            synth: SyntheticSpec::default(),
            model: LsteegConfig::default(),
            train: TrainConfig::default(),
            bands: DEFAULT_BANDS.to_vec(),
            detect: DetectSection::default(),
            correct: CorrectSection::default(),
            analyze: AnalyzeSection::default(),
            sweep: SweepSection::default(),
            psd: PsdSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSection {
    pub partition: Partition,
    pub threshold: ThresholdMethod,
}

impl Default for DetectSection {
    fn default() -> Self {
        Self {
            partition: Partition::Test,
            threshold: ThresholdMethod::Youden,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectSection {
    /// Partition the RMSE summary is computed on; every epoch is corrected.
    pub partition: Partition,
}

impl Default for CorrectSection {
    fn default() -> Self {
        Self {
            partition: Partition::Test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub partition: Partition,
    pub clean_only: bool,
    /// Number of most activated dimensions to export maps for.
    pub mads: usize,
    /// Dimensions for temporal activation; the MADs when absent.
    pub temporal_dims: Option<Vec<usize>>,
    /// Epoch indices (within the analyzed selection) to interpolate between.
    pub pair: [usize; 2],
    pub steps: usize,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            partition: Partition::Test,
            clean_only: false,
            mads: 5,
            temporal_dims: None,
            pair: [0, 1],
            steps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            axis: SweepAxis::Latent,
            values: vec![8, 128],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdSection {
    pub partition: Partition,
    pub clean_only: bool,
}

impl Default for PsdSection {
    fn default() -> Self {
        Self {
            partition: Partition::Test,
            clean_only: true,
        }
    }
}

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

/// Sidecar written next to every command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolved {
    pub command: String,
    pub data: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub config: RunConfig,
}

pub fn parse_partition(s: &str) -> Result<Partition> {
    match s {
        "train" => Ok(Partition::Train),
        "val" => Ok(Partition::Val),
        "test" => Ok(Partition::Test),
        _ => Err(Error::Usage(format!("unknown partition {s:?} (train, val or test)"))),
    }
}

pub fn parse_axis(s: &str) -> Result<SweepAxis> {
    match s {
        "n_latent" => Ok(SweepAxis::Latent),
        "n_outer" => Ok(SweepAxis::Outer),
        "n_inner" => Ok(SweepAxis::Inner),
        _ => Err(Error::Usage(format!("unknown sweep axis {s:?} (n_latent, n_outer or n_inner)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"train": {"epochs": 3}}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"train": {"max_epochs": 3}}"#).unwrap();
        assert_eq!(c.train.max_epochs, 3);
        assert_eq!(c.train.batch_size, TrainConfig::default().batch_size);
    }
}
