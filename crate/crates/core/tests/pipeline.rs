use lsteeg_core::model::{LsteegConfig, LsteegModel};
use lsteeg_core::nn::Matrix;
use lsteeg_core::pipeline::{
    detect_scores, evaluate_correction, identity_baseline, pair_loss, roc_auc, select_threshold,
    sweep, train, training_pairs, CorrectionSummary, SweepAxis, ThresholdMethod, TrainConfig,
    TrainMode,
};
use lsteeg_core::synth::{DatasetRecord, EpochDataset, Label, Partition};
use lsteeg_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{pairwise_auc, random_instance};
use Label::{Clean, Noisy};

#[test]
fn auc_matches_pairwise_oracle_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..50 {
        let n = rng.random_range(2..=200);
        let levels = if k % 2 == 0 { 5 } else { 1000 };
        let (s, l) = random_instance(&mut rng, n, levels);
        assert_eq!(roc_auc(&s, &l).unwrap().auc, pairwise_auc(&s, &l), "instance {k}");
    }
}

#[test]
fn perfectly_separated_scores_give_auc_one() {
    let s = [0.1, 0.2, 0.3, 5.0, 6.0];
    let l = [Clean, Clean, Clean, Noisy, Noisy];
    assert_eq!(roc_auc(&s, &l).unwrap().auc, 1.0);
}

#[test]
fn independent_labels_average_half() {
    let mut total = 0.0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..10_000).map(|_| rng.random()).collect();
        let l: Vec<Label> = (0..10_000).map(|_| if rng.random_bool(0.5) { Noisy } else { Clean }).collect();
        total += roc_auc(&s, &l).unwrap().auc;
    }
    let mean = total / 100.0;
    assert!((mean - 0.5).abs() < 0.02, "{mean}");
}

#[test]
fn youden_on_hand_dataset_falls_between_classes() {
    let roc = roc_auc(&[1.0, 2.0, 3.0, 4.0], &[Clean, Clean, Noisy, Noisy]).unwrap();
    let t = select_threshold(&roc, ThresholdMethod::Youden).unwrap();
    assert!(t.value > 2.0 && t.value <= 3.0);
    assert!(!t.degenerate);
}

#[test]
fn youden_prefers_lowest_fpr_gap_endpoint() {
    let roc = roc_auc(&[0.0, 1.0, 10.0, 11.0, 12.0], &[Clean, Clean, Noisy, Noisy, Noisy]).unwrap();
    let t = select_threshold(&roc, ThresholdMethod::Youden).unwrap();
    assert_eq!((t.value, t.fpr, t.tpr), (10.0, 0.0, 1.0));
}

#[test]
fn youden_flags_all_equal_scores() {
    let roc = roc_auc(&[2.5; 6], &[Clean, Noisy, Clean, Noisy, Clean, Clean]).unwrap();
    let t = select_threshold(&roc, ThresholdMethod::Youden).unwrap();
    assert_eq!(t.value, 2.5);
    assert!(t.degenerate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auc_is_invariant_under_monotone_maps(seed in any::<u64>(), n in 2usize..150) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, l) = random_instance(&mut rng, n, 20);
        let a = roc_auc(&s, &l).unwrap().auc;
        let exp: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() + 1.0).collect();
        let cube: Vec<f64> = s.iter().map(|v| v * v * v - 7.0).collect();
        prop_assert_eq!(roc_auc(&exp, &l).unwrap().auc, a);
        prop_assert_eq!(roc_auc(&cube, &l).unwrap().auc, a);
    }

    #[test]
    fn roc_points_are_monotone(seed in any::<u64>(), n in 2usize..150) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, l) = random_instance(&mut rng, n, 30);
        let roc = roc_auc(&s, &l).unwrap();
        let first = roc.points[0];
        let last = *roc.points.last().unwrap();
        prop_assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for w in roc.points.windows(2) {
            prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            prop_assert!(w[1].threshold < w[0].threshold);
        }
        prop_assert!((0.0..=1.0).contains(&roc.auc));
    }

    #[test]
    fn auc_oracle_on_small_random_instances(seed in any::<u64>(), n in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, l) = random_instance(&mut rng, n, 4);
        prop_assert_eq!(roc_auc(&s, &l).unwrap().auc, pairwise_auc(&s, &l));
    }
}

fn tiny_config(seed: u64) -> LsteegConfig {
    LsteegConfig {
        n_channels: 3,
        n_samples: 8,
        n_outer: 6,
        n_inner: 4,
        n_latent: 6,
        dropout_p: 0.0,
        rng_seed: seed,
        normalize: false,
    }
}

/// Smooth 3×8 epochs, five subjects, split 3/1/1; every other epoch of a
/// subject carries an additive spike with the clean version as target.
fn toy_dataset(seed: u64) -> EpochDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for s in 0..5u32 {
        let partition = match s {
            0..=2 => Partition::Train,
            3 => Partition::Val,
            _ => Partition::Test,
        };
        for e in 0..6 {
            let (f, p) = (rng.random_range(0.3..0.9), rng.random_range(0.0..6.0));
            let clean = Matrix::from_fn(3, 8, |c, t| (f * t as f64 + p + c as f64).sin());
            let mut input = clean.clone();
            let label = if e % 2 == 1 {
                input.set(rng.random_range(0..3), rng.random_range(0..8), 4.0);
                Noisy
            } else {
                Clean
            };
            records.push(DatasetRecord {
                subject_id: s,
                input,
                target: Some(clean),
                label,
                partition: Some(partition),
                artifacts: vec![],
            });
        }
    }
    EpochDataset {
        sample_rate: 100.0,
        channels: vec!["a".into(), "b".into(), "c".into()],
        spec: None,
        records,
    }
}

fn quick(max_epochs: usize, patience: usize, mode: TrainMode) -> TrainConfig {
    TrainConfig {
        max_epochs,
        batch_size: 4,
        lr: 1e-2,
        patience,
        seed: 3,
        mode,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_deterministic() {
    let ds = toy_dataset(1);
    let m = LsteegModel::build(&tiny_config(2)).unwrap();
    let cfg = quick(15, 5, TrainMode::Correction);
    let (a, ha) = train(&m, &ds, &cfg).unwrap();
    let (b, hb) = train(&m, &ds, &cfg).unwrap();
    assert_eq!(ha, hb);
    assert_eq!(a, b);
}

#[test]
fn restored_weights_have_the_best_validation_loss() {
    let ds = toy_dataset(2);
    let m = LsteegModel::build(&tiny_config(4)).unwrap();
    let (trained, h) = train(&m, &ds, &quick(40, 10, TrainMode::Correction)).unwrap();
    let min = h.val_loss.iter().cloned().fold(h.initial_val_loss, f64::min);
    assert_eq!(h.best_val_loss, min);
    let val = training_pairs(&trained, &ds, Partition::Val, TrainMode::Correction).unwrap();
    assert_eq!(pair_loss(&trained, &val).unwrap(), min);
    assert!(h.train_loss.len() <= 40);
}

#[test]
fn zero_patience_stops_at_first_non_improving_epoch() {
    let ds = toy_dataset(3);
    let m = LsteegModel::build(&tiny_config(5)).unwrap();
    let cfg = TrainConfig { lr: 0.5, ..quick(200, 0, TrainMode::Detection) };
    let (_, h) = train(&m, &ds, &cfg).unwrap();
    assert!(h.stopped_early);
    let n = h.val_loss.len();
    let mut best = h.initial_val_loss;
    for (i, v) in h.val_loss.iter().enumerate() {
        if *v < best - cfg.min_delta {
            best = *v;
            assert!(i + 1 < n, "last epoch must be non-improving");
        } else {
            assert_eq!(i + 1, n, "stopped late at {i}");
        }
    }
}

#[test]
fn empty_validation_partition_is_a_config_error() {
    let mut ds = toy_dataset(4);
    for r in &mut ds.records {
        if r.partition == Some(Partition::Val) {
            r.partition = Some(Partition::Test);
        }
    }
    let m = LsteegModel::build(&tiny_config(1)).unwrap();
    assert!(matches!(train(&m, &ds, &quick(5, 1, TrainMode::Detection)), Err(Error::Config(_))));
}

#[test]
fn invalid_train_configs_are_rejected() {
    let ds = toy_dataset(5);
    let m = LsteegModel::build(&tiny_config(1)).unwrap();
    for cfg in [
        quick(5, 5, TrainMode::Detection),
        TrainConfig { batch_size: 0, ..quick(5, 1, TrainMode::Detection) },
        TrainConfig { lr: 0.0, ..quick(5, 1, TrainMode::Detection) },
    ] {
        assert!(matches!(train(&m, &ds, &cfg), Err(Error::Config(_))));
    }
}

#[test]
fn shape_mismatch_is_a_dimension_error() {
    let ds = toy_dataset(6);
    let m = LsteegModel::build(&LsteegConfig { n_samples: 9, ..tiny_config(1) }).unwrap();
    assert!(matches!(train(&m, &ds, &quick(5, 1, TrainMode::Detection)), Err(Error::Dimension(_))));
}

#[test]
fn diverging_training_reports_numeric_failure() {
    let ds = toy_dataset(7);
    let mut m = LsteegModel::build(&tiny_config(1)).unwrap();
    m.params.out_dense.bias[0] = f64::NAN;
    assert!(matches!(train(&m, &ds, &quick(5, 1, TrainMode::Detection)), Err(Error::Numeric(_))));
}

#[test]
fn identity_map_scores_zero_in_any_order() {
    let ds = toy_dataset(8);
    let mut epochs: Vec<Matrix> = ds.records.iter().map(|r| r.input.clone()).collect();
    let id = |x: &Matrix| Ok(x.clone());
    assert!(detect_scores(&id, &epochs).unwrap().iter().all(|&s| s == 0.0));
    let m = LsteegModel::build(&tiny_config(9)).unwrap();
    let fwd = detect_scores(&m, &epochs).unwrap();
    epochs.reverse();
    let mut rev = detect_scores(&m, &epochs).unwrap();
    rev.reverse();
    assert_eq!(fwd, rev);
}

#[test]
fn trained_on_clean_scores_noisy_higher() {
    let ds = toy_dataset(9);
    let m = LsteegModel::build(&tiny_config(3)).unwrap();
    let (trained, _) = train(&m, &ds, &quick(150, 150 - 1, TrainMode::Detection)).unwrap();
    let recs: Vec<_> = ds.records.iter().filter(|r| r.partition == Some(Partition::Test)).collect();
    let s = detect_scores(&trained, &recs.iter().map(|r| r.input.clone()).collect::<Vec<_>>()).unwrap();
    let mean = |lab: Label| {
        let v: Vec<f64> = s.iter().zip(&recs).filter(|(_, r)| r.label == lab).map(|(s, _)| *s).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean(Noisy) > mean(Clean));
}

/// RMSE recomputed without the library helpers.
fn direct_rmse(a: &Matrix, b: &Matrix) -> f64 {
    let ss: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum();
    (ss / a.len() as f64).sqrt()
}

#[test]
fn perfect_and_identity_models_on_clean_pairs() {
    let ds = toy_dataset(10);
    let noisy: Vec<(Matrix, Matrix)> = ds.records.iter().map(|r| (r.input.clone(), r.target.clone().unwrap())).collect();
    let lookup = noisy.clone();
    let perfect = move |x: &Matrix| Ok(lookup.iter().find(|(i, _)| i == x).unwrap().1.clone());
    let s = evaluate_correction(&perfect, &noisy).unwrap();
    assert_eq!((s.mean, s.sd), (0.0, 0.0));
    let clean: Vec<(Matrix, Matrix)> = noisy.iter().map(|(_, t)| (t.clone(), t.clone())).collect();
    let s = identity_baseline(&clean).unwrap();
    assert_eq!((s.mean, s.sd), (0.0, 0.0));
}

#[test]
fn identity_model_on_noisy_pairs_matches_direct_rmse() {
    let ds = toy_dataset(11);
    let pairs: Vec<(Matrix, Matrix)> = ds.records.iter().map(|r| (r.input.clone(), r.target.clone().unwrap())).collect();
    let s = identity_baseline(&pairs).unwrap();
    let direct: Vec<f64> = pairs.iter().map(|(x, y)| direct_rmse(x, y)).collect();
    let mean = direct.iter().sum::<f64>() / direct.len() as f64;
    let sd = (direct.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / direct.len() as f64).sqrt();
    assert!((s.mean - mean).abs() < 1e-12 && (s.sd - sd).abs() < 1e-12);
    assert!(s.mean > 0.0);
}

#[test]
fn population_sd_is_used() {
    let s = CorrectionSummary::from_values(vec![1.0, 3.0]);
    assert_eq!((s.mean, s.sd), (2.0, 1.0));
}

#[test]
fn sweep_single_value_and_duplicates() {
    let ds = toy_dataset(12);
    let base = tiny_config(1);
    let cfg = quick(4, 1, TrainMode::Correction);
    let one = sweep(SweepAxis::Latent, &[4], &base, &cfg, &ds).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].value, 4);
    let rows = sweep(SweepAxis::Inner, &[5, 2, 5, 2, 3], &base, &cfg, &ds).unwrap();
    assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), [2, 3, 5]);
    assert!(rows.iter().all(|r| r.test_mse.is_finite()));
    assert!(matches!(sweep(SweepAxis::Outer, &[], &base, &cfg, &ds), Err(Error::Config(_))));
}
