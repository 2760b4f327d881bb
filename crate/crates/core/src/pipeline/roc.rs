use serde::{Deserialize, Serialize};

use crate::error::{ensure_dims, Error, Result};
use crate::synth::Label;

/// One operating point: epochs with `score >= threshold` are flagged noisy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// From (0, 0) at threshold +∞ to (1, 1) at the lowest score.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub n_positive: usize,
    pub n_negative: usize,
}

/// ROC curve with noisy epochs as the positive class. Equal scores form a
/// single threshold step, so the trapezoid area counts ties as one half.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    ensure_dims!(
        scores.len() == labels.len(),
        "{} scores for {} labels",
        scores.len(),
        labels.len()
    );
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::Numeric(format!("score {i} is NaN")));
    }
    let n_pos = labels.iter().filter(|&&l| l == Label::Noisy).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc(format!(
            "{n_pos} noisy and {n_neg} clean epochs; both classes are required"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));

    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    // Twice the area in units of one (positive, negative) pair.
    let mut area2: u128 = 0;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let (prev_tp, prev_fp) = (tp, fp);
        while k < order.len() && scores[order[k]] == s {
            match labels[order[k]] {
                Label::Noisy => tp += 1,
                Label::Clean => fp += 1,
            }
            k += 1;
        }
        area2 += u128::from(fp - prev_fp) * u128::from(tp + prev_tp);
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold: s,
        });
    }
    let auc = area2 as f64 / (2 * n_pos as u128 * n_neg as u128) as f64;
    Ok(RocCurve {
        points,
        auc,
        n_positive: n_pos,
        n_negative: n_neg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMethod {
    Youden,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub tpr: f64,
    pub fpr: f64,
    /// Youden's J = TPR - FPR at the chosen point.
    pub j: f64,
    /// Set when no threshold separates the classes better than chance.
    pub degenerate: bool,
}

/// Score threshold maximizing TPR - FPR over the curve's finite thresholds;
/// ties go to the point with the lower FPR.
pub fn select_threshold(roc: &RocCurve, method: ThresholdMethod) -> Result<Threshold> {
    match method {
        ThresholdMethod::Youden => {}
    }
    let mut best: Option<Threshold> = None;
    for p in roc.points.iter().filter(|p| p.threshold.is_finite()) {
        let j = p.tpr - p.fpr;
        if best.is_none_or(|b| j > b.j) {
            best = Some(Threshold {
                value: p.threshold,
                tpr: p.tpr,
                fpr: p.fpr,
                j,
                degenerate: false,
            });
        }
    }
    let mut t = best.ok_or_else(|| Error::UndefinedAuc("ROC curve has no finite threshold".into()))?;
    let distinct = roc.points.iter().filter(|p| p.threshold.is_finite()).count();
    t.degenerate = distinct < 2 || t.j <= 0.0;
    Ok(t)
}
