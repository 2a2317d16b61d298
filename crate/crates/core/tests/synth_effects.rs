//! Monte-Carlo checks that the generator's effect channels point the right
//! way, paired by seed across impairment levels.

use inkscreen_core::features::{extract_session_features, FeatureConfig, SessionFeatureVector};
use inkscreen_core::stroke::Task;
use inkscreen_core::synth::{generate_session, CohortSpec};
use rayon::prelude::*;

const SEEDS: u64 = 100;

fn cohort(theta: f64) -> Vec<SessionFeatureVector> {
    let spec = CohortSpec::with_theta(theta);
    (0..SEEDS)
        .into_par_iter()
        .map(|seed| extract_session_features(&generate_session(&spec, seed).unwrap(), &FeatureConfig::default()))
        .collect()
}

fn feature(cohort: &[SessionFeatureVector], task: Task, name: &str) -> Vec<f64> {
    cohort.iter().map(|v| v.get(task, name).unwrap()).collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// One-sided sign-test p-value for `wins` out of `n` fair coin flips.
fn sign_test(wins: u64, n: u64) -> f64 {
    let mut p = 0.0;
    let mut binom = 1.0;
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        if k >= wins {
            p += binom;
        }
    }
    p / 2f64.powi(n as i32)
}

#[test]
fn sign_test_reference() {
    assert!((sign_test(0, 10) - 1.0).abs() < 1e-15);
    assert!((sign_test(10, 10) - 1.0 / 1024.0).abs() < 1e-15);
}

#[test]
fn pentagon_pause_mean_grows_with_theta() {
    let low = feature(&cohort(0.0), Task::Pentagon, "pause_mean");
    let high = feature(&cohort(1.0), Task::Pentagon, "pause_mean");
    assert!(mean(&high) > mean(&low), "{} vs {}", mean(&high), mean(&low));
}

#[test]
fn channels_are_monotone() {
    let levels = [0.0, 0.5, 1.0].map(|t| (t, cohort(t)));
    for pair in levels.windows(2) {
        let ((a, lo), (b, hi)) = (&pair[0], &pair[1]);
        for task in Task::ALL {
            let pause_lo = feature(lo, task, "pause_mean");
            let pause_hi = feature(hi, task, "pause_mean");
            let wins = pause_lo.iter().zip(&pause_hi).filter(|(l, h)| h > l).count() as u64;
            assert!(sign_test(wins, SEEDS) < 0.01, "{task:?} pause_mean {a}->{b}: {wins}/100");

            let speed_lo = feature(lo, task, "speed_median");
            let speed_hi = feature(hi, task, "speed_median");
            let wins = speed_lo.iter().zip(&speed_hi).filter(|(l, h)| h < l).count() as u64;
            assert!(sign_test(wins, SEEDS) < 0.01, "{task:?} speed_median {a}->{b}: {wins}/100");
        }
    }
}
