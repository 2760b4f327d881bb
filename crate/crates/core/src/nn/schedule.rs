use std::f64::consts::PI;

/// Periodic cosine annealing between `lr_max` and `lr_min` with half-period
/// `t_max` epochs (no restart multiplier).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineSchedule {
    pub lr_max: f64,
    pub lr_min: f64,
    pub t_max: u64,
}

impl Default for CosineSchedule {
    fn default() -> Self {
        Self {
            lr_max: 5e-4,
            lr_min: 0.0,
            t_max: 10,
        }
    }
}

/// `lr_min + (lr_max - lr_min) * (1 + cos(π (t mod 2T) / T)) / 2`
pub fn cosine_lr(schedule: &CosineSchedule, t: u64) -> f64 {
    let period = schedule.t_max.max(1);
    let phase = (t % (2 * period)) as f64 / period as f64;
    let lr = schedule.lr_min
        + (schedule.lr_max - schedule.lr_min) * (1.0 + (PI * phase).cos()) / 2.0;
    lr.clamp(schedule.lr_min, schedule.lr_max)
}
