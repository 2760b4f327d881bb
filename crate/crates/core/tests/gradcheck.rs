mod common;

use common::*;

#[test]
fn dense_matches_finite_differences() {
    for seed in 0..100 {
        let e = dense_gradcheck(seed);
        assert!(e < FD_REL_TOL, "seed {seed}: rel err {e:e}");
    }
}

#[test]
fn lstm_matches_finite_differences() {
    for seed in 0..100 {
        let e = lstm_gradcheck(seed);
        assert!(e < FD_REL_TOL, "seed {seed}: rel err {e:e}");
    }
}

#[test]
fn longer_wider_lstm_matches_finite_differences() {
    for seed in 0..10 {
        let e = lstm_gradcheck_shape(seed, 4, 5, 12);
        assert!(e < FD_REL_TOL, "seed {seed}: rel err {e:e}");
    }
}

#[test]
fn dropout_matches_finite_differences() {
    for seed in 0..100 {
        for p in [0.0, 0.3] {
            let e = dropout_gradcheck(seed, p);
            assert!(e < FD_REL_TOL, "seed {seed} p {p}: rel err {e:e}");
        }
    }
}

#[test]
fn tiny_model_matches_finite_differences() {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let e = model_gradcheck(seed, 0.0);
        worst = worst.max(e);
        assert!(e < FD_REL_TOL, "seed {seed}: rel err {e:e}");
    }
    eprintln!("worst tiny-model rel err {worst:e}");
}

#[test]
fn tiny_model_with_dropout_mask_matches_finite_differences() {
    for seed in 0..10 {
        let e = model_gradcheck(seed, 0.2);
        assert!(e < FD_REL_TOL, "seed {seed}: rel err {e:e}");
    }
}
