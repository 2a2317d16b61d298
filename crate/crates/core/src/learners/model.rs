use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::forest::{fit_random_forest, ForestParams, ForestTask, Node, RandomForestModel};
use super::glm::{fit_linear, fit_logistic, ElasticNetGlm, GlmFlavor, SolverOptions};
use super::svm::{fit_svm, fit_svr, Kernel, SvmModel};
use super::{ClassWeights, LearnError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    ElasticNet,
    RandomForest,
    Svm,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::ElasticNet, ModelFamily::RandomForest, ModelFamily::Svm];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// One grid point of one family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum HyperParams {
    ElasticNet { alpha: f64, c: f64 },
    RandomForest { max_depth: usize, max_features: usize },
    Svm { kernel: KernelKind, c: f64, gamma: f64 },
}

impl HyperParams {
    pub fn family(&self) -> ModelFamily {
        match self {
            HyperParams::ElasticNet { .. } => ModelFamily::ElasticNet,
            HyperParams::RandomForest { .. } => ModelFamily::RandomForest,
            HyperParams::Svm { .. } => ModelFamily::Svm,
        }
    }
}

/// Training targets: class indices `0..n_classes` or real values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Labels {
    Classes { y: Vec<usize>, n_classes: usize },
    Values(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Classes { y, .. } => y.len(),
            Labels::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_classification(&self) -> bool {
        matches!(self, Labels::Classes { .. })
    }

    pub fn select(&self, rows: &[usize]) -> Labels {
        match self {
            Labels::Classes { y, n_classes } => Labels::Classes {
                y: rows.iter().map(|&i| y[i]).collect(),
                n_classes: *n_classes,
            },
            Labels::Values(v) => Labels::Values(rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub n_trees: usize,
    pub solver_tol: f64,
    pub solver_max_sweeps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_trees: 100,
            solver_tol: 1e-5,
            solver_max_sweeps: 10_000,
        }
    }
}

impl FitOptions {
    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tol,
            max_sweeps: self.solver_max_sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FittedModel {
    Glm(ElasticNetGlm),
    Forest(RandomForestModel),
    /// One-vs-rest classifiers; a single model for two classes.
    SvmOvr { n_classes: usize, models: Vec<SvmModel> },
    Svr(SvmModel),
}

/// Model output: an `n × K` score matrix (probabilities or decision values)
/// for classifiers, real values for regressors.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Scores(Array2<f64>),
    Values(Vec<f64>),
}

fn kernel_of(kind: KernelKind, gamma: f64) -> Kernel {
    match kind {
        KernelKind::Linear => Kernel::Linear,
        KernelKind::Rbf => Kernel::Rbf { gamma },
    }
}

pub fn fit_model(
    params: HyperParams,
    x: ArrayView2<f64>,
    labels: &Labels,
    seed: u64,
    opts: &FitOptions,
) -> Result<FittedModel, LearnError> {
    if labels.len() != x.nrows() {
        return Err(LearnError::ShapeMismatch {
            expected: x.nrows(),
            got: labels.len(),
        });
    }
    match labels {
        Labels::Classes { y, n_classes } => {
            let weights = ClassWeights::balanced(y, *n_classes)?;
            let sw = weights.sample_weights(y);
            match params {
                HyperParams::ElasticNet { alpha, c } => {
                    fit_logistic(x, y, *n_classes, alpha, c, &sw, opts.solver()).map(FittedModel::Glm)
                }
                HyperParams::RandomForest {
                    max_depth,
                    max_features,
                } => {
                    let target: Vec<f64> = y.iter().map(|&c| c as f64).collect();
                    let fp = ForestParams {
                        n_trees: opts.n_trees,
                        max_depth,
                        max_features,
                    };
                    fit_random_forest(x, &target, ForestTask::Classification { n_classes: *n_classes }, fp, seed, &sw)
                        .map(FittedModel::Forest)
                }
                HyperParams::Svm { kernel, c, gamma } => {
                    let kernel = kernel_of(kernel, gamma);
                    let classes: Vec<usize> = if *n_classes == 2 { vec![1] } else { (0..*n_classes).collect() };
                    let models = classes
                        .into_iter()
                        .map(|k| {
                            let positive: Vec<bool> = y.iter().map(|&c| c == k).collect();
                            fit_svm(x, &positive, kernel, c, &sw).map(|f| f.model)
                        })
                        .collect::<Result<_, _>>()?;
                    Ok(FittedModel::SvmOvr {
                        n_classes: *n_classes,
                        models,
                    })
                }
            }
        }
        Labels::Values(v) => match params {
            HyperParams::ElasticNet { alpha, c } => {
                fit_linear(x, v, alpha, c, &vec![1.0; v.len()], opts.solver()).map(FittedModel::Glm)
            }
            HyperParams::RandomForest {
                max_depth,
                max_features,
            } => {
                let fp = ForestParams {
                    n_trees: opts.n_trees,
                    max_depth,
                    max_features,
                };
                fit_random_forest(x, v, ForestTask::Regression, fp, seed, &vec![1.0; v.len()]).map(FittedModel::Forest)
            }
            HyperParams::Svm { kernel, c, gamma } => fit_svr(x, v, kernel_of(kernel, gamma), c).map(FittedModel::Svr),
        },
    }
}

impl FittedModel {
    /// Input width the model was fitted on.
    pub fn n_features(&self) -> Option<usize> {
        match self {
            FittedModel::Glm(m) => Some(m.n_features),
            FittedModel::Forest(m) => Some(m.n_features),
            FittedModel::SvmOvr { models, .. } => models.first().map(|m| m.support_vectors.ncols()),
            FittedModel::Svr(m) => Some(m.support_vectors.ncols()),
        }
    }

    /// Class count for classifiers, `None` for regressors.
    pub fn n_classes(&self) -> Option<usize> {
        match self {
            FittedModel::Glm(m) => (m.flavor == GlmFlavor::Logistic).then_some(m.n_classes),
            FittedModel::Forest(m) => match m.task {
                ForestTask::Classification { n_classes } => Some(n_classes),
                ForestTask::Regression => None,
            },
            FittedModel::SvmOvr { n_classes, .. } => Some(*n_classes),
            FittedModel::Svr(_) => None,
        }
    }

    /// Structural consistency of a decoded model, so prediction cannot
    /// index out of bounds or loop.
    pub fn validate(&self) -> Result<(), String> {
        let width = self.n_features().ok_or("model has no parts")?;
        let finite = |v: f64, what: &str| if v.is_finite() { Ok(()) } else { Err(format!("non-finite {what}")) };
        let svm = |m: &SvmModel| -> Result<(), String> {
            m.kernel.check().map_err(|e| e.to_string())?;
            if m.support_vectors.ncols() != width || m.support_vectors.nrows() != m.coefficients.len() {
                return Err("support vector shape".into());
            }
            m.support_vectors.iter().chain(&m.coefficients).try_for_each(|&v| finite(v, "svm parameter"))?;
            finite(m.bias, "bias")
        };
        match self {
            FittedModel::Glm(m) => {
                let expected = match (m.flavor, m.n_classes) {
                    (GlmFlavor::Linear, 0) => 1,
                    (GlmFlavor::Logistic, 2) => 1,
                    (GlmFlavor::Logistic, k) if k > 2 => k,
                    _ => return Err("inconsistent GLM class count".into()),
                };
                if m.predictors.len() != expected || m.predictors.iter().any(|p| p.weights.len() != width) {
                    return Err("GLM predictor shape".into());
                }
                for p in &m.predictors {
                    p.weights.iter().try_for_each(|&w| finite(w, "weight"))?;
                    finite(p.intercept, "intercept")?;
                }
            }
            FittedModel::Forest(m) => {
                let leaf_len = match m.task {
                    ForestTask::Classification { n_classes } if n_classes >= 2 => n_classes,
                    ForestTask::Classification { .. } => return Err("forest class count".into()),
                    ForestTask::Regression => 1,
                };
                if m.trees.is_empty() {
                    return Err("forest has no trees".into());
                }
                for tree in &m.trees {
                    let nodes = tree.nodes();
                    if nodes.is_empty() {
                        return Err("empty tree".into());
                    }
                    for (at, node) in nodes.iter().enumerate() {
                        match node {
                            Node::Leaf { value } => {
                                if value.len() != leaf_len {
                                    return Err("leaf width".into());
                                }
                                value.iter().try_for_each(|&v| finite(v, "leaf value"))?;
                            }
                            Node::Split {
                                feature,
                                threshold,
                                left,
                                right,
                                ..
                            } => {
                                // children always follow their parent, which rules out cycles
                                if *feature >= width || *left <= at || *right <= at || *left >= nodes.len() || *right >= nodes.len() {
                                    return Err("split indices".into());
                                }
                                finite(*threshold, "threshold")?;
                            }
                        }
                    }
                }
            }
            FittedModel::SvmOvr { n_classes, models } => {
                let expected = match *n_classes {
                    2 => 1,
                    k if k > 2 => k,
                    _ => return Err("svm class count".into()),
                };
                if models.len() != expected {
                    return Err("svm model count".into());
                }
                models.iter().try_for_each(svm)?;
            }
            FittedModel::Svr(m) => svm(m)?,
        }
        Ok(())
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction, LearnError> {
        match self {
            FittedModel::Glm(m) if m.n_classes > 0 => m.predict_proba(x).map(Prediction::Scores),
            FittedModel::Glm(m) => m.predict_values(x).map(Prediction::Values),
            FittedModel::Forest(m) => match m.task {
                ForestTask::Classification { .. } => m.predict_proba(x).map(Prediction::Scores),
                ForestTask::Regression => m.predict_values(x).map(Prediction::Values),
            },
            FittedModel::SvmOvr { n_classes, models } => {
                let mut out = Array2::zeros((x.nrows(), *n_classes));
                if *n_classes == 2 {
                    for (i, f) in models[0].decision(x)?.into_iter().enumerate() {
                        out[[i, 0]] = -f;
                        out[[i, 1]] = f;
                    }
                } else {
                    for (k, m) in models.iter().enumerate() {
                        for (i, f) in m.decision(x)?.into_iter().enumerate() {
                            out[[i, k]] = f;
                        }
                    }
                }
                Ok(Prediction::Scores(out))
            }
            FittedModel::Svr(m) => m.decision(x).map(Prediction::Values),
        }
    }

    /// Class probabilities for reporting. SVM decision values are mapped
    /// through a softmax; the other families return their own probabilities.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, LearnError> {
        match self.predict(x)? {
            Prediction::Values(_) => Err(LearnError::WrongTask),
            Prediction::Scores(mut s) => {
                if let FittedModel::SvmOvr { .. } = self {
                    for mut row in s.rows_mut() {
                        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        row.mapv_inplace(|v| (v - m).exp());
                        let total = row.sum();
                        row.mapv_inplace(|v| v / total);
                    }
                }
                Ok(s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn three_class(seed: u64) -> (Array2<f64>, Labels) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let x = Array2::from_shape_fn((60, 3), |(i, j)| {
            rng.random_range(-0.5..0.5) + if j == 0 { y[i] as f64 } else { 0.0 }
        });
        (x, Labels::Classes { y, n_classes: 3 })
    }

    #[test]
    fn every_family_returns_normalized_probabilities() {
        let (x, labels) = three_class(1);
        let grid = [
            HyperParams::ElasticNet { alpha: 0.5, c: 1.0 },
            HyperParams::RandomForest {
                max_depth: 3,
                max_features: 2,
            },
            HyperParams::Svm {
                kernel: KernelKind::Rbf,
                c: 10.0,
                gamma: 0.1,
            },
        ];
        for hp in grid {
            let m = fit_model(hp, x.view(), &labels, 3, &FitOptions::default()).unwrap();
            let p = m.predict_proba(x.view()).unwrap();
            assert_eq!(p.ncols(), 3);
            for row in p.rows() {
                assert!((row.sum() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn doubling_weights_keeps_predictions() {
        // uniform rescaling of every sample weight is normalized away
        let (x, labels) = three_class(2);
        let Labels::Classes { y, .. } = &labels else { unreachable!() };
        let positive: Vec<bool> = y.iter().map(|&c| c == 2).collect();
        let w = vec![1.3; 60];
        let w2: Vec<f64> = w.iter().map(|v| v * 2.0).collect();
        let a = fit_svm(x.view(), &positive, Kernel::Rbf { gamma: 0.3 }, 5.0, &w).unwrap();
        let b = fit_svm(x.view(), &positive, Kernel::Rbf { gamma: 0.3 }, 5.0, &w2).unwrap();
        assert_eq!(a.model.decision(x.view()).unwrap(), b.model.decision(x.view()).unwrap());

        let yk: Vec<usize> = positive.iter().map(|&p| usize::from(p)).collect();
        let g1 = fit_logistic(x.view(), &yk, 2, 0.5, 0.1, &w, SolverOptions::default()).unwrap();
        let g2 = fit_logistic(x.view(), &yk, 2, 0.5, 0.1, &w2, SolverOptions::default()).unwrap();
        assert_eq!(g1.predict_proba(x.view()).unwrap(), g2.predict_proba(x.view()).unwrap());
    }
}
