//! Labelled epoch collections and their binary file format:
//!
//! ```text
//! "LSDS" | version u32 | total_len u64
//! header_len u64 | header JSON (utf-8)
//! inputs  f32[n_epochs · n_channels · n_samples]     (epoch, channel, time)
//! targets f32[n_targets · n_channels · n_samples]    entries with has_target only
//! crc64 u64 (CRC-64/XZ of every preceding byte)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ArtifactKind, SyntheticSpec};
use crate::binio::{Reader, Writer};
use crate::error::{ensure_dims, Error, Result};
use crate::nn::Matrix;

pub const DATASET_MAGIC: [u8; 4] = *b"LSDS";
pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Clean,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub subject_id: u32,
    pub input: Matrix,
    pub target: Option<Matrix>,
    pub label: Label,
    pub partition: Option<Partition>,
    pub artifacts: Vec<ArtifactKind>,
}

impl DatasetRecord {
    /// The paired target, or the input itself when none is stored.
    pub fn target_or_input(&self) -> &Matrix {
        self.target.as_ref().unwrap_or(&self.input)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochDataset {
    pub sample_rate: f64,
    pub channels: Vec<String>,
    /// Generator settings, when the data is synthetic.
    pub spec: Option<SyntheticSpec>,
    pub records: Vec<DatasetRecord>,
}

impl EpochDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// (channels, samples) shared by every epoch.
    pub fn epoch_shape(&self) -> (usize, usize) {
        self.records
            .first()
            .map(|r| r.input.shape())
            .unwrap_or((self.channels.len(), 0))
    }

    pub fn subjects(&self) -> BTreeSet<u32> {
        self.records.iter().map(|r| r.subject_id).collect()
    }

    pub fn subjects_in(&self, p: Partition) -> BTreeSet<u32> {
        self.records
            .iter()
            .filter(|r| r.partition == Some(p))
            .map(|r| r.subject_id)
            .collect()
    }

    pub fn partition(&self, p: Partition) -> impl Iterator<Item = &DatasetRecord> {
        self.records.iter().filter(move |r| r.partition == Some(p))
    }

    /// Shape agreement and one partition per subject.
    pub fn validate(&self) -> Result<()> {
        let shape = self.epoch_shape();
        ensure_dims!(
            shape.0 == self.channels.len(),
            "{} channel labels for {}-channel epochs",
            self.channels.len(),
            shape.0
        );
        let mut owner: BTreeMap<u32, Option<Partition>> = BTreeMap::new();
        for (i, r) in self.records.iter().enumerate() {
            ensure_dims!(r.input.shape() == shape, "epoch {i} has shape {:?}", r.input.shape());
            if let Some(t) = &r.target {
                ensure_dims!(t.shape() == shape, "target {i} has shape {:?}", t.shape());
            }
            if let Some(prev) = owner.insert(r.subject_id, r.partition) {
                if prev != r.partition {
                    return Err(Error::Config(format!(
                        "subject {} spans partitions {prev:?} and {:?}",
                        r.subject_id, r.partition
                    )));
                }
            }
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::Config(format!("sample rate {}", self.sample_rate)));
        }
        Ok(())
    }
}

/// Subject-level train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitFractions {
    /// Largest-remainder apportionment of `n` subjects (ties go to the
    /// earlier partition).
    pub fn counts(&self, n: usize) -> Result<[usize; 3]> {
        let f = [self.train, self.val, self.test];
        let total: f64 = f.iter().sum();
        if f.iter().any(|v| !(*v >= 0.0)) || !(total > 0.0) {
            return Err(Error::Config(format!("split fractions {f:?}")));
        }
        let quota: Vec<f64> = f.iter().map(|v| v / total * n as f64).collect();
        let mut counts = [0usize; 3];
        for i in 0..3 {
            counts[i] = quota[i].floor() as usize;
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| {
            let ri = quota[i] - quota[i].floor();
            let rj = quota[j] - quota[j].floor();
            rj.total_cmp(&ri).then(i.cmp(&j))
        });
        let left = n - counts.iter().sum::<usize>();
        for &i in order.iter().take(left) {
            counts[i] += 1;
        }
        Ok(counts)
    }
}

/// Minimum subject count for a three-way subject-level split.
const MIN_SPLIT_SUBJECTS: usize = 5;

/// Shuffles subjects with `seed` and assigns them to train/val/test; every
/// epoch follows its subject.
pub fn split_by_subject(dataset: &EpochDataset, fractions: SplitFractions, seed: u64) -> Result<EpochDataset> {
    let mut subjects: Vec<u32> = dataset.subjects().into_iter().collect();
    if subjects.len() < MIN_SPLIT_SUBJECTS {
        return Err(Error::Config(format!(
            "{} subjects cannot be split by subject (need at least {MIN_SPLIT_SUBJECTS})",
            subjects.len()
        )));
    }
    let counts = fractions.counts(subjects.len())?;
    subjects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assign = BTreeMap::new();
    let parts = [Partition::Train, Partition::Val, Partition::Test];
    let mut it = subjects.into_iter();
    for (p, c) in parts.into_iter().zip(counts) {
        for s in it.by_ref().take(c) {
            assign.insert(s, p);
        }
    }
    let mut out = dataset.clone();
    for r in &mut out.records {
        r.partition = Some(assign[&r.subject_id]);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    sample_rate: f64,
    channels: Vec<String>,
    n_epochs: usize,
    n_channels: usize,
    n_samples: usize,
    subjects: Vec<u32>,
    labels: Vec<Label>,
    partitions: Vec<Option<Partition>>,
    has_target: Vec<bool>,
    artifacts: Vec<Vec<ArtifactKind>>,
    spec: Option<SyntheticSpec>,
}

pub fn write_dataset(ds: &EpochDataset) -> Result<Vec<u8>> {
    ds.validate()?;
    let (nc, nt) = ds.epoch_shape();
    let header = Header {
        sample_rate: ds.sample_rate,
        channels: ds.channels.clone(),
        n_epochs: ds.len(),
        n_channels: nc,
        n_samples: nt,
        subjects: ds.records.iter().map(|r| r.subject_id).collect(),
        labels: ds.records.iter().map(|r| r.label).collect(),
        partitions: ds.records.iter().map(|r| r.partition).collect(),
        has_target: ds.records.iter().map(|r| r.target.is_some()).collect(),
        artifacts: ds.records.iter().map(|r| r.artifacts.clone()).collect(),
        spec: ds.spec.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut w = Writer::new(DATASET_MAGIC, DATASET_VERSION);
    w.u64(json.len() as u64);
    w.bytes(&json);
    for r in &ds.records {
        r.input.data().iter().for_each(|&v| w.f32(v as f32));
    }
    for t in ds.records.iter().filter_map(|r| r.target.as_ref()) {
        t.data().iter().for_each(|&v| w.f32(v as f32));
    }
    Ok(w.finish())
}

pub fn read_dataset(bytes: &[u8]) -> Result<EpochDataset> {
    let mut r = Reader::open(bytes, DATASET_MAGIC, DATASET_VERSION)?;
    let hlen = r.usize()?;
    let header: Header = serde_json::from_slice(r.bytes(hlen)?)
        .map_err(|e| Error::Format(format!("dataset header: {e}")))?;
    let n = header.n_epochs;
    let per_entry = [
        header.subjects.len(),
        header.labels.len(),
        header.partitions.len(),
        header.has_target.len(),
        header.artifacts.len(),
    ];
    if per_entry.iter().any(|&l| l != n) || header.channels.len() != header.n_channels {
        return Err(Error::Format("dataset header lists disagree with n_epochs".into()));
    }
    let size = header
        .n_channels
        .checked_mul(header.n_samples)
        .ok_or_else(|| Error::Format("epoch size overflows".into()))?;
    let n_targets = header.has_target.iter().filter(|&&b| b).count();
    let expected = size
        .checked_mul(n + n_targets)
        .and_then(|v| v.checked_mul(4))
        .ok_or_else(|| Error::Format("payload size overflows".into()))?;
    if r.remaining() != expected {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header implies {expected}",
            r.remaining()
        )));
    }
    let block = |r: &mut Reader| -> Result<Matrix> {
        let data = (0..size).map(|_| r.f32().map(f64::from)).collect::<Result<Vec<_>>>()?;
        Matrix::from_vec(header.n_channels, header.n_samples, data)
    };
    let inputs = (0..n).map(|_| block(&mut r)).collect::<Result<Vec<_>>>()?;
    let mut records = Vec::with_capacity(n);
    for (i, input) in inputs.into_iter().enumerate() {
        records.push(DatasetRecord {
            subject_id: header.subjects[i],
            input,
            target: None,
            label: header.labels[i],
            partition: header.partitions[i],
            artifacts: header.artifacts[i].clone(),
        });
    }
    for (rec, has) in records.iter_mut().zip(&header.has_target) {
        if *has {
            rec.target = Some(block(&mut r)?);
        }
    }
    let ds = EpochDataset {
        sample_rate: header.sample_rate,
        channels: header.channels,
        spec: header.spec,
        records,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn save_dataset(ds: &EpochDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_dataset(ds)?)?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<EpochDataset> {
    read_dataset(&fs::read(path)?)
}
