use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::folds::kfold_for;
use super::metrics::{auc_from_scores, r2};
use super::EvalError;
use crate::learners::{fit_model, FitOptions, HyperParams, KernelKind, Labels, ModelFamily, Prediction};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElasticNetGrid {
    pub alpha: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestGrid {
    pub max_depth: Vec<usize>,
    pub max_features: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmGrid {
    pub kernel: Vec<KernelKind>,
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for ElasticNetGrid {
    fn default() -> Self {
        ElasticNetGrid {
            alpha: vec![0.1, 0.325, 0.55, 0.775, 1.0],
            c: vec![0.001, 0.01, 0.1, 1.0],
        }
    }
}

impl Default for ForestGrid {
    fn default() -> Self {
        ForestGrid {
            max_depth: vec![2, 3],
            max_features: vec![2, 3, 4, 5],
        }
    }
}

impl Default for SvmGrid {
    fn default() -> Self {
        SvmGrid {
            kernel: vec![KernelKind::Linear, KernelKind::Rbf],
            c: vec![1.0, 10.0, 50.0, 100.0, 200.0],
            gamma: vec![0.0001, 0.001, 0.01, 0.1, 1.0],
        }
    }
}

/// Candidate hyperparameters per family.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperGrid {
    pub elastic_net: ElasticNetGrid,
    pub random_forest: ForestGrid,
    pub svm: SvmGrid,
}

impl HyperGrid {
    /// A nine-point subset of the default grids for quick runs.
    pub fn reduced() -> Self {
        HyperGrid {
            elastic_net: ElasticNetGrid {
                alpha: vec![0.55, 1.0],
                c: vec![0.1, 1.0],
            },
            random_forest: ForestGrid {
                max_depth: vec![3],
                max_features: vec![3, 5],
            },
            svm: SvmGrid {
                kernel: vec![KernelKind::Linear, KernelKind::Rbf],
                c: vec![1.0, 10.0],
                gamma: vec![0.01],
            },
        }
    }

    /// Grid points of `family` in search order (outer list varies slowest).
    /// A linear kernel ignores gamma, so it contributes one point per C.
    pub fn points(&self, family: ModelFamily) -> Vec<HyperParams> {
        let mut out = Vec::new();
        match family {
            ModelFamily::ElasticNet => {
                for &alpha in &self.elastic_net.alpha {
                    for &c in &self.elastic_net.c {
                        out.push(HyperParams::ElasticNet { alpha, c });
                    }
                }
            }
            ModelFamily::RandomForest => {
                for &max_depth in &self.random_forest.max_depth {
                    for &max_features in &self.random_forest.max_features {
                        out.push(HyperParams::RandomForest {
                            max_depth,
                            max_features,
                        });
                    }
                }
            }
            ModelFamily::Svm => {
                for &kernel in &self.svm.kernel {
                    for &c in &self.svm.c {
                        match kernel {
                            KernelKind::Linear => {
                                let gamma = self.svm.gamma.first().copied().unwrap_or(1.0);
                                out.push(HyperParams::Svm { kernel, c, gamma });
                            }
                            KernelKind::Rbf => {
                                for &gamma in &self.svm.gamma {
                                    out.push(HyperParams::Svm { kernel, c, gamma });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// AUC for class labels, R² for continuous ones.
pub fn objective(labels: &Labels, prediction: &Prediction) -> Result<f64, EvalError> {
    match (labels, prediction) {
        (Labels::Classes { y, .. }, Prediction::Scores(s)) => auc_from_scores(y, s.view()),
        (Labels::Values(v), Prediction::Values(p)) => r2(v, p),
        _ => Err(EvalError::Learn(crate::learners::LearnError::WrongTask)),
    }
}

/// Best grid point by mean inner-fold objective. Ties keep the earlier
/// point. Returns the point and its score.
pub fn inner_grid_search(
    x: ArrayView2<f64>,
    labels: &Labels,
    points: &[HyperParams],
    inner_k: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<(HyperParams, f64), EvalError> {
    if points.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    let folds = kfold_for(labels, inner_k, seed)?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..inner_k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..folds.len()).partition(|&i| folds[i] == f);
            (train, test)
        })
        .collect();

    let mut best: Option<(HyperParams, f64)> = None;
    for &point in points {
        let mut total = 0.0;
        for (f, (train, test)) in splits.iter().enumerate() {
            let xt = x.select(ndarray::Axis(0), train);
            let xv = x.select(ndarray::Axis(0), test);
            let model = fit_model(point, xt.view(), &labels.select(train), derive_seed(seed, &[f as u64]), opts)?;
            total += objective(&labels.select(test), &model.predict(xv.view())?)?;
        }
        let score = total / inner_k as f64;
        let score = if score.is_nan() { f64::NEG_INFINITY } else { score };
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((point, score));
        }
    }
    Ok(best.expect("grid is non-empty"))
}
