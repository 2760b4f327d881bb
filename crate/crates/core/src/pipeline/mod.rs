//! Training, anomaly scoring, ROC analysis, correction metrics and
//! hyperparameter sweeps.

mod eval;
mod roc;
mod train;

pub use eval::{
    detect_scores, evaluate_correction, evaluate_psd, identity_baseline, sweep, test_pairs,
    CorrectionSummary, EpochMap, SweepAxis, SweepRow,
};
pub use roc::{roc_auc, select_threshold, RocCurve, RocPoint, Threshold, ThresholdMethod};
pub use train::{fit_pairs, pair_loss, train, training_pairs, TrainConfig, TrainHistory, TrainMode};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::signal::AttenuationCurve;

/// Fixed 17-significant-digit form, stable across platforms and exact on
/// round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Everything one run reports; sections are filled by whichever stages ran.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub history: Option<TrainHistory>,
    pub test_rmse: Option<CorrectionSummary>,
    pub roc: Option<RocCurve>,
    pub threshold: Option<Threshold>,
    pub attenuation: Option<AttenuationCurve>,
}

/// Compact JSON summary of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub auc: Option<f64>,
    pub rmse_mean: Option<f64>,
    pub rmse_sd: Option<f64>,
    pub threshold: Option<f64>,
    pub threshold_degenerate: Option<bool>,
    pub best_val_loss: Option<f64>,
    pub epochs_run: Option<usize>,
}

impl MetricReport {
    pub fn summary(&self) -> Summary {
        Summary {
            auc: self.roc.as_ref().map(|r| r.auc),
            rmse_mean: self.test_rmse.as_ref().map(|r| r.mean),
            rmse_sd: self.test_rmse.as_ref().map(|r| r.sd),
            threshold: self.threshold.map(|t| t.value),
            threshold_degenerate: self.threshold.map(|t| t.degenerate),
            best_val_loss: self.history.as_ref().map(|h| h.best_val_loss),
            epochs_run: self.history.as_ref().map(|h| h.train_loss.len()),
        }
    }
}

pub fn history_csv(h: &TrainHistory) -> String {
    let mut s = String::from("epoch,train_loss,val_loss\n");
    for (i, (t, v)) in h.train_loss.iter().zip(&h.val_loss).enumerate() {
        let _ = writeln!(s, "{i},{},{}", fmt_f64(*t), fmt_f64(*v));
    }
    s
}

pub fn roc_csv(roc: &RocCurve) -> String {
    let mut s = String::from("threshold,fpr,tpr\n");
    for p in &roc.points {
        let _ = writeln!(s, "{},{},{}", fmt_f64(p.threshold), fmt_f64(p.fpr), fmt_f64(p.tpr));
    }
    s
}

pub fn scores_csv(scores: &[f64], labels: &[crate::synth::Label]) -> String {
    let mut s = String::from("index,score,label\n");
    for (i, (v, l)) in scores.iter().zip(labels).enumerate() {
        let label = match l {
            crate::synth::Label::Clean => "clean",
            crate::synth::Label::Noisy => "noisy",
        };
        let _ = writeln!(s, "{i},{},{label}", fmt_f64(*v));
    }
    s
}

pub fn sweep_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut s = format!("{},test_mse\n", axis.name());
    for r in rows {
        let _ = writeln!(s, "{},{}", r.value, fmt_f64(r.test_mse));
    }
    s
}

pub fn attenuation_csv(curve: &AttenuationCurve) -> String {
    let mut s = String::from("freq_hz,attenuation_db\n");
    for (f, d) in curve.freqs.iter().zip(&curve.db) {
        let _ = writeln!(s, "{},{}", fmt_f64(*f), fmt_f64(*d));
    }
    s
}
