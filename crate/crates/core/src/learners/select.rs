use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::glm::{fit_linear, fit_logistic, SolverOptions};
use super::{ClassWeights, LearnError, Labels};

/// Size of the fallback set used when the L1 fit keeps nothing.
pub const FALLBACK_FEATURES: usize = 10;
const KEEP_THRESHOLD: f64 = 1e-8;

/// How continuous targets are screened. Class labels always use L1
/// logistic regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorFlavor {
    /// L1 linear regression on the raw target.
    #[default]
    Lasso,
    /// L1 logistic regression on the target split at its median.
    Logistic,
}

/// Indices kept by an L1-penalized fit at inverse strength `selection_c`,
/// in increasing order. Multiclass labels keep the union over the
/// one-vs-rest fits. If nothing survives, the [`FALLBACK_FEATURES`] columns
/// with the largest |weight| are returned, ties broken by the magnitude of
/// the loss gradient at the fitted model and then by index.
pub fn l1_select_features(
    x: ArrayView2<f64>,
    labels: &Labels,
    selection_c: f64,
    flavor: SelectorFlavor,
) -> Result<Vec<usize>, LearnError> {
    let opts = SolverOptions::default();
    let p = x.ncols();
    let (model, targets, sw): (_, Vec<Vec<f64>>, Vec<f64>) = match labels {
        Labels::Classes { y, n_classes } => {
            let sw = ClassWeights::balanced(y, *n_classes)?.sample_weights(y);
            let m = fit_logistic(x, y, *n_classes, 1.0, selection_c, &sw, opts)?;
            let ks: Vec<usize> = if *n_classes == 2 { vec![1] } else { (0..*n_classes).collect() };
            let t = ks
                .into_iter()
                .map(|k| y.iter().map(|&c| f64::from(u8::from(c == k))).collect())
                .collect();
            (m, t, sw)
        }
        Labels::Values(v) => match flavor {
            SelectorFlavor::Lasso => {
                let sw = vec![1.0; v.len()];
                (fit_linear(x, v, 1.0, selection_c, &sw, opts)?, vec![v.clone()], sw)
            }
            SelectorFlavor::Logistic => {
                let med = crate::features::stats::median(v).ok_or(LearnError::EmptyLabels)?;
                let y: Vec<usize> = v.iter().map(|&t| usize::from(t > med)).collect();
                let sw = ClassWeights::balanced(&y, 2)?.sample_weights(&y);
                let t = vec![y.iter().map(|&c| c as f64).collect()];
                (fit_logistic(x, &y, 2, 1.0, selection_c, &sw, opts)?, t, sw)
            }
        },
    };

    let magnitude = model.weight_magnitudes();
    let kept: Vec<usize> = (0..p).filter(|&j| magnitude[j] > KEEP_THRESHOLD).collect();
    if !kept.is_empty() {
        return Ok(kept);
    }

    // |∂ loss / ∂ w_j| at the fitted predictors, max over one-vs-rest fits
    let s_total: f64 = sw.iter().sum();
    let mut grad = vec![0.0_f64; p];
    for (pred, target) in model.predictors.iter().zip(&targets) {
        let residual: Vec<f64> = x
            .rows()
            .into_iter()
            .zip(target)
            .map(|(row, &t)| {
                let eta = pred.score(row);
                match model.flavor {
                    super::glm::GlmFlavor::Logistic => 1.0 / (1.0 + (-eta).exp()) - t,
                    super::glm::GlmFlavor::Linear => eta - t,
                }
            })
            .collect();
        for (j, col) in x.columns().into_iter().enumerate() {
            let g: f64 = col.iter().zip(&residual).zip(&sw).map(|((xv, r), s)| s * xv * r).sum::<f64>() / s_total;
            grad[j] = grad[j].max(g.abs());
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        magnitude[b]
            .total_cmp(&magnitude[a])
            .then(grad[b].total_cmp(&grad[a]))
            .then(a.cmp(&b))
    });
    order.truncate(FALLBACK_FEATURES.min(p));
    order.sort_unstable();
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn informative(seed: u64) -> (Array2<f64>, Labels) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 200;
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = Array2::from_shape_fn((n, 51), |(i, j)| {
            let z: f64 = rng.sample(StandardNormal);
            if j == 17 {
                z + if y[i] == 1 { 1.0 } else { -1.0 }
            } else {
                z
            }
        });
        (x, Labels::Classes { y, n_classes: 2 })
    }

    #[test]
    fn finds_the_informative_feature() {
        let hits = (0..100)
            .filter(|&seed| {
                let (x, labels) = informative(seed);
                l1_select_features(x.view(), &labels, 0.1, SelectorFlavor::Lasso)
                    .unwrap()
                    .contains(&17)
            })
            .count();
        assert!(hits >= 95, "{hits}");
    }

    #[test]
    fn vanishing_c_falls_back_to_ten() {
        let (x, labels) = informative(7);
        let sel = l1_select_features(x.view(), &labels, 1e-9, SelectorFlavor::Lasso).unwrap();
        assert_eq!(sel.len(), FALLBACK_FEATURES);
        assert!(sel.contains(&17));
    }

    #[test]
    fn indices_strictly_increasing() {
        for seed in 0..5 {
            let (x, labels) = informative(seed);
            for c in [1e-6, 0.01, 0.1, 1.0] {
                let sel = l1_select_features(x.view(), &labels, c, SelectorFlavor::Lasso).unwrap();
                assert!(sel.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn regression_flavors() {
        let (x, _) = informative(3);
        let v: Vec<f64> = x.column(4).iter().map(|a| 2.0 * a).collect();
        let labels = Labels::Values(v);
        for flavor in [SelectorFlavor::Lasso, SelectorFlavor::Logistic] {
            let sel = l1_select_features(x.view(), &labels, 0.1, flavor).unwrap();
            assert!(sel.contains(&4), "{flavor:?} {sel:?}");
        }
    }
}
