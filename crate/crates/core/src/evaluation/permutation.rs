use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nested::{nested_cv, CvConfig, REPORT_SCHEMA_VERSION};
use super::EvalError;
use crate::learners::Labels;
use crate::seed::derive_seed;

const TAG_PERMUTE: u64 = 0x7065_726d;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationResult {
    pub schema_version: u32,
    pub metric: String,
    pub observed: f64,
    pub null: Vec<f64>,
    pub p_value: f64,
    pub seed: u64,
}

/// `(1 + #{null ≥ observed}) / (1 + len)`.
pub fn permutation_p_value(observed: f64, null: &[f64]) -> f64 {
    let at_least = null.iter().filter(|&&v| v >= observed).count();
    (1 + at_least) as f64 / (1 + null.len()) as f64
}

/// `labels` shuffled with a seeded generator.
pub fn permute_labels(labels: &Labels, seed: u64) -> Labels {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    labels.select(&order)
}

/// Reruns the whole nested CV on `n_perm` label shuffles and compares the
/// headline metric (AUC or R²) against the unshuffled run. Fold seeds are
/// shared with the observed run.
pub fn permutation_test(
    x: ArrayView2<f64>,
    labels: &Labels,
    cfg: &CvConfig,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationResult, EvalError> {
    if n_perm == 0 {
        return Err(EvalError::BadPermCount);
    }
    let observed = nested_cv(x, labels, cfg, seed, None)?;
    let null = (0..n_perm)
        .into_par_iter()
        .map(|i| {
            let shuffled = permute_labels(labels, derive_seed(seed, &[TAG_PERMUTE, i as u64]));
            nested_cv(x, &shuffled, cfg, seed, None).map(|r| r.headline_mean())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let obs = observed.headline_mean();
    Ok(PermutationResult {
        schema_version: REPORT_SCHEMA_VERSION,
        metric: observed.headline,
        observed: obs,
        p_value: permutation_p_value(obs, &null),
        null,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::nested::tests::small_config;
    use ndarray::Array2;

    #[test]
    fn p_value_formula() {
        let null: Vec<f64> = (0..100).map(|i| i as f64 / 200.0).collect();
        assert_eq!(permutation_p_value(1.0, &null), 1.0 / 101.0);
        assert_eq!(permutation_p_value(-1.0, &null), 1.0);
        let p = permutation_p_value(null[50], &null);
        assert!((p - 0.5).abs() < 0.01, "{p}");
    }

    #[test]
    fn zero_permutations() {
        let x = Array2::<f64>::zeros((10, 2));
        let labels = Labels::Values(vec![0.0; 10]);
        assert_eq!(
            permutation_test(x.view(), &labels, &CvConfig::default(), 0, 1),
            Err(EvalError::BadPermCount)
        );
    }

    #[test]
    fn permutation_keeps_multiset() {
        let labels = Labels::Classes {
            y: (0..30).map(|i| i % 3).collect(),
            n_classes: 3,
        };
        let Labels::Classes { y, .. } = permute_labels(&labels, 4) else { unreachable!() };
        let mut sorted = y.clone();
        sorted.sort_unstable();
        let Labels::Classes { y: orig, .. } = &labels else { unreachable!() };
        let mut o = orig.clone();
        o.sort_unstable();
        assert_eq!(sorted, o);
        assert_ne!(&y, orig);
    }

    #[test]
    fn separable_data_beats_every_shuffle() {
        let y: Vec<usize> = (0..30).map(|i| i % 2).collect();
        let x = Array2::from_shape_fn((30, 3), |(i, j)| if j == 0 { y[i] as f64 } else { ((i * 7 + j) % 5) as f64 });
        let mut cfg = small_config();
        cfg.repeats = 1;
        let res = permutation_test(x.view(), &Labels::Classes { y, n_classes: 2 }, &cfg, 5, 2).unwrap();
        assert_eq!(res.observed, 1.0);
        assert_eq!(res.p_value, 1.0 / 6.0);
        assert_eq!(res.null.len(), 5);
    }
}
