use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LsteegModel, LsteegParams};
use crate::nn::{adam_step, cosine_lr, mse, mse_loss, AdamState, CosineSchedule, Matrix, Mode};
use crate::synth::{EpochDataset, Label, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    /// Reconstruct clean epochs (target = input); only clean-labelled epochs
    /// are used.
    Detection,
    /// Map every input epoch to its paired target.
    Correction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lr_min: f64,
    /// Half-period of the cosine schedule, in epochs.
    pub t_max: u64,
    pub patience: usize,
    pub min_delta: f64,
    pub seed: u64,
    pub mode: TrainMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 1000,
            batch_size: 16,
            lr: 5e-4,
            lr_min: 0.0,
            t_max: 10,
            patience: 20,
            min_delta: 1e-7,
            seed: 0,
            mode: TrainMode::Detection,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 || self.patience >= self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite() && self.lr_min >= 0.0 && self.lr_min <= self.lr) {
            return Err(Error::Config(format!("learning rates {} / {}", self.lr, self.lr_min)));
        }
        if self.t_max == 0 || !(self.min_delta >= 0.0) {
            return Err(Error::Config("t_max must be positive and min_delta non-negative".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> CosineSchedule {
        CosineSchedule {
            lr_max: self.lr,
            lr_min: self.lr_min,
            t_max: self.t_max,
        }
    }
}

/// Loss curves and stopping information of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Mean per-epoch training loss (dropout active).
    pub train_loss: Vec<f64>,
    /// Validation loss after each epoch (eval mode).
    pub val_loss: Vec<f64>,
    /// Validation loss of the untrained model.
    pub initial_val_loss: f64,
    /// Index into `val_loss` of the restored weights; `None` when no epoch
    /// beat the untrained model.
    pub best_epoch: Option<usize>,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

/// (input, target) pairs of `partition` in the network's working space.
pub fn training_pairs(
    model: &LsteegModel,
    ds: &EpochDataset,
    partition: Partition,
    mode: TrainMode,
) -> Result<Vec<(Matrix, Matrix)>> {
    ds.partition(partition)
        .filter(|r| mode == TrainMode::Correction || r.label == Label::Clean)
        .map(|r| {
            let (x, scale) = model.prepare(&r.input)?;
            let y = match (mode, scale) {
                (TrainMode::Detection, _) => x.clone(),
                (TrainMode::Correction, Some(s)) => s.apply(r.target_or_input())?,
                (TrainMode::Correction, None) => r.target_or_input().clone(),
            };
            Ok((x, y))
        })
        .collect()
}

/// Mean eval-mode MSE over pairs.
pub fn pair_loss(model: &LsteegModel, pairs: &[(Matrix, Matrix)]) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in pairs {
        total += mse(&model.forward(x)?, y)?;
    }
    Ok(total / pairs.len().max(1) as f64)
}

fn require(pairs: &[(Matrix, Matrix)], what: Partition) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Config(format!("{what:?} partition has no usable epochs")));
    }
    Ok(())
}

/// Adam with the cosine schedule stepped per epoch, mini-batch gradients
/// averaged over samples, early stopping on validation loss. The weights
/// with the best validation loss are returned.
pub fn train(model: &LsteegModel, ds: &EpochDataset, cfg: &TrainConfig) -> Result<(LsteegModel, TrainHistory)> {
    cfg.validate()?;
    let (nc, nt) = ds.epoch_shape();
    let mc = model.config();
    if (nc, nt) != (mc.n_channels, mc.n_samples) {
        return Err(Error::Dimension(format!(
            "dataset epochs are {nc}x{nt}, model expects {}x{}",
            mc.n_channels, mc.n_samples
        )));
    }
    let train_pairs = training_pairs(model, ds, Partition::Train, cfg.mode)?;
    let val_pairs = training_pairs(model, ds, Partition::Val, cfg.mode)?;
    require(&train_pairs, Partition::Train)?;
    require(&val_pairs, Partition::Val)?;
    fit_pairs(model, &train_pairs, &val_pairs, cfg)
}

/// The training loop on prepared pairs.
pub fn fit_pairs(
    model: &LsteegModel,
    train_pairs: &[(Matrix, Matrix)],
    val_pairs: &[(Matrix, Matrix)],
    cfg: &TrainConfig,
) -> Result<(LsteegModel, TrainHistory)> {
    cfg.validate()?;
    require(train_pairs, Partition::Train)?;
    require(val_pairs, Partition::Val)?;
    let mut model = model.clone();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    dropout_rng.set_stream(1);
    let mut adam = AdamState::new(&model.params.tensor_sizes());
    let mut grads = model.params.zeros_like();
    let schedule = cfg.schedule();

    let initial_val_loss = pair_loss(&model, val_pairs)?;
    let mut best_val = initial_val_loss;
    let mut best_params: LsteegParams = model.params.clone();
    let mut best_epoch = None;
    let mut patience_ref = initial_val_loss;
    let mut wait = 0usize;
    let mut history = TrainHistory {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        initial_val_loss,
        best_epoch: None,
        best_val_loss: initial_val_loss,
        stopped_early: false,
    };
    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    for epoch in 0..cfg.max_epochs {
        let lr = cosine_lr(&schedule, epoch as u64);
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            grads.fill(0.0);
            for &i in batch {
                let (x, y) = &train_pairs[i];
                let (out, trace) = model.forward_trace(x, Mode::Train, &mut dropout_rng)?;
                let (loss, g) = mse_loss(&out, y)?;
                if !loss.is_finite() {
                    return Err(Error::Numeric(format!(
                        "training loss became {loss} at epoch {epoch}, batch {b}, sample {i}"
                    )));
                }
                epoch_loss += loss;
                model.backward(&trace, &g.scale(1.0 / batch.len() as f64), &mut grads)?;
            }
            // the schedule touches zero once per period; that epoch makes no update
            if lr > 0.0 {
                let g: Vec<&[f64]> = grads.tensors().into_iter().map(|t| t.data).collect();
                adam_step(&mut adam, &mut model.params.tensors_mut(), &g, lr)?;
            }
        }
        history.train_loss.push(epoch_loss / train_pairs.len() as f64);
        let val = pair_loss(&model, val_pairs)?;
        if !val.is_finite() {
            return Err(Error::Numeric(format!("validation loss became {val} at epoch {epoch}")));
        }
        history.val_loss.push(val);
        if val < best_val {
            best_val = val;
            best_params = model.params.clone();
            best_epoch = Some(epoch);
        }
        if val < patience_ref - cfg.min_delta {
            patience_ref = val;
            wait = 0;
        } else {
            wait += 1;
            if wait >= cfg.patience.max(1) {
                history.stopped_early = true;
                break;
            }
        }
    }
    model.params = best_params;
    history.best_val_loss = best_val;
    history.best_epoch = best_epoch;
    Ok((model, history))
}
