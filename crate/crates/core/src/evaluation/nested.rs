use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::grid::{inner_grid_search, HyperGrid};
use super::metrics::{
    accuracy, argmax, auc_from_scores, ci95, confusion_matrix, f1, macro_f1, mae, r2, rmse, sensitivity, specificity,
};
use super::EvalError;
use crate::learners::{
    fit_model, l1_select_features, FitOptions, FittedModel, HyperParams, Labels, ModelFamily, Prediction, Preprocessor,
    SelectorFlavor,
};
use crate::seed::derive_seed;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

const TAG_TUNE: u64 = 1;
const TAG_REFIT: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub repeats: usize,
    pub outer_k: usize,
    pub inner_k: usize,
    pub selection_c: f64,
    pub regression_selector: SelectorFlavor,
    pub families: Vec<ModelFamily>,
    pub grid: HyperGrid,
    pub fit: FitOptions,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            repeats: 10,
            outer_k: 5,
            inner_k: 5,
            selection_c: 0.1,
            regression_selector: SelectorFlavor::Lasso,
            families: ModelFamily::ALL.to_vec(),
            grid: HyperGrid::default(),
            fit: FitOptions::default(),
        }
    }
}

impl CvConfig {
    /// Full protocol (10 × 5 × 5) over [`HyperGrid::reduced`] with 50-tree forests.
    pub fn reduced() -> Self {
        CvConfig {
            grid: HyperGrid::reduced(),
            fit: FitOptions {
                n_trees: 50,
                ..FitOptions::default()
            },
            ..CvConfig::default()
        }
    }
}

/// Pipeline step that touched a set of rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Preprocess,
    Select,
    Tune,
    Refit,
    Predict,
}

#[derive(Debug, Clone, Copy)]
pub struct Access<'a> {
    pub repeat: usize,
    pub fold: usize,
    pub stage: Stage,
    pub rows: &'a [usize],
}

/// Instrumentation callback; called from worker threads.
pub type Observer<'a> = &'a (dyn Fn(&Access) + Sync);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldChoice {
    pub repeat: usize,
    pub fold: usize,
    pub family: ModelFamily,
    pub params: HyperParams,
    pub inner_score: f64,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// `None` with a single repeat.
    pub ci95: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub schema_version: u32,
    pub n_samples: usize,
    pub n_classes: Option<usize>,
    pub repeats: usize,
    pub outer_k: usize,
    pub inner_k: usize,
    pub seed: u64,
    pub headline: String,
    pub per_repeat: BTreeMap<String, Vec<f64>>,
    pub summary: BTreeMap<String, MetricSummary>,
    /// Summed over repeats, indexed `[truth][predicted]`.
    pub confusion_matrix: Option<Vec<Vec<u64>>>,
    pub folds: Vec<FoldChoice>,
}

impl CvResult {
    pub fn headline_mean(&self) -> f64 {
        self.summary[&self.headline].mean
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.summary.get(metric).map(|s| s.mean)
    }
}

/// A preprocessor, a selected column set and a tuned model, fitted together
/// on one training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub preprocessor: Preprocessor,
    pub selected: Vec<usize>,
    pub params: HyperParams,
    pub inner_score: f64,
    pub model: FittedModel,
}

impl FittedPipeline {
    /// Raw rows (`NaN` = missing) to model output.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction, EvalError> {
        let z = self.preprocessor.transform(x)?;
        Ok(self.model.predict(z.select(Axis(1), &self.selected).view())?)
    }

    /// Class probabilities, softmax-mapped for SVMs.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, EvalError> {
        let z = self.preprocessor.transform(x)?;
        Ok(self.model.predict_proba(z.select(Axis(1), &self.selected).view())?)
    }
}

/// Fits the preprocessor, selects features, tunes every configured family
/// on inner folds and refits the best point on all of `x`. `on_stage` is
/// told when each step starts.
pub fn fit_pipeline(
    x: ArrayView2<f64>,
    labels: &Labels,
    cfg: &CvConfig,
    seed: u64,
    on_stage: &mut dyn FnMut(Stage),
) -> Result<FittedPipeline, EvalError> {
    if labels.len() != x.nrows() {
        return Err(EvalError::LengthMismatch(x.nrows(), labels.len()));
    }
    on_stage(Stage::Preprocess);
    let preprocessor = Preprocessor::fit(x)?;
    let z = preprocessor.transform(x)?;

    on_stage(Stage::Select);
    let selected = l1_select_features(z.view(), labels, cfg.selection_c, cfg.regression_selector)?;
    let zs = z.select(Axis(1), &selected);

    on_stage(Stage::Tune);
    let tune_seed = derive_seed(seed, &[TAG_TUNE]);
    let mut best: Option<(HyperParams, f64)> = None;
    for &family in &cfg.families {
        let points = cfg.grid.points(family);
        let (params, score) = inner_grid_search(zs.view(), labels, &points, cfg.inner_k, tune_seed, &cfg.fit)?;
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((params, score));
        }
    }
    let (params, inner_score) = best.ok_or(EvalError::NoFamilies)?;

    on_stage(Stage::Refit);
    let model = fit_model(params, zs.view(), labels, derive_seed(seed, &[TAG_REFIT]), &cfg.fit)?;
    Ok(FittedPipeline {
        preprocessor,
        selected,
        params,
        inner_score,
        model,
    })
}

struct FoldOutcome {
    choice: FoldChoice,
    test: Vec<usize>,
    prediction: Prediction,
}

fn run_fold(
    x: ArrayView2<f64>,
    labels: &Labels,
    plan: &FoldPlan,
    fold: usize,
    cfg: &CvConfig,
    seed: u64,
    observer: Option<Observer>,
) -> Result<FoldOutcome, EvalError> {
    let repeat = plan.repeat;
    let train = plan.train_rows(fold);
    let test = plan.test_rows(fold);
    let mut on_stage = |stage| {
        if let Some(f) = observer {
            f(&Access {
                repeat,
                fold,
                stage,
                rows: &train,
            });
        }
    };
    let pipeline = fit_pipeline(
        x.select(Axis(0), &train).view(),
        &labels.select(&train),
        cfg,
        derive_seed(seed, &[repeat as u64, fold as u64]),
        &mut on_stage,
    )?;

    if let Some(f) = observer {
        f(&Access {
            repeat,
            fold,
            stage: Stage::Predict,
            rows: &test,
        });
    }
    let prediction = pipeline.predict(x.select(Axis(0), &test).view())?;
    let FittedPipeline {
        selected,
        params,
        inner_score,
        ..
    } = pipeline;
    Ok(FoldOutcome {
        choice: FoldChoice {
            repeat,
            fold,
            family: params.family(),
            params,
            inner_score,
            selected,
        },
        test,
        prediction,
    })
}

/// Repeated nested cross-validation. Every repeat draws fresh stratified
/// outer folds; each outer fold fits the preprocessor, selects features,
/// tunes every family on inner folds and refits the winner, all on the
/// outer-training rows only. Missing feature values are `NaN`.
///
/// Class AUC is averaged over the outer folds of a repeat; the other
/// metrics use the repeat's pooled out-of-fold predictions.
pub fn nested_cv(
    x: ArrayView2<f64>,
    labels: &Labels,
    cfg: &CvConfig,
    seed: u64,
    observer: Option<Observer>,
) -> Result<CvResult, EvalError> {
    if labels.len() != x.nrows() {
        return Err(EvalError::LengthMismatch(x.nrows(), labels.len()));
    }
    if cfg.repeats == 0 {
        return Err(EvalError::BadRepeatCount);
    }
    if cfg.families.is_empty() {
        return Err(EvalError::NoFamilies);
    }
    let plans = (0..cfg.repeats)
        .map(|r| FoldPlan::new(labels, r, cfg.outer_k, cfg.inner_k, derive_seed(seed, &[r as u64])))
        .collect::<Result<Vec<_>, _>>()?;
    let units: Vec<(usize, usize)> = (0..cfg.repeats).flat_map(|r| (0..cfg.outer_k).map(move |f| (r, f))).collect();
    let outcomes = units
        .par_iter()
        .map(|&(r, f)| run_fold(x, labels, &plans[r], f, cfg, seed, observer))
        .collect::<Result<Vec<_>, _>>()?;

    let mut per_repeat: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut push = |name: &str, v: f64| per_repeat.entry(name.to_string()).or_default().push(v);
    let mut confusion: Option<Vec<Vec<u64>>> = None;
    let n = labels.len();

    for chunk in outcomes.chunks(cfg.outer_k) {
        match labels {
            Labels::Classes { y, n_classes } => {
                let mut fold_auc = 0.0;
                let mut pred = vec![0usize; n];
                for o in chunk {
                    let Prediction::Scores(s) = &o.prediction else {
                        unreachable!("classifier returned values")
                    };
                    let truth: Vec<usize> = o.test.iter().map(|&i| y[i]).collect();
                    fold_auc += auc_from_scores(&truth, s.view())?;
                    for (row, &i) in s.rows().into_iter().zip(&o.test) {
                        pred[i] = argmax(row.iter().copied());
                    }
                }
                push("auc", fold_auc / chunk.len() as f64);
                push("accuracy", accuracy(y, &pred)?);
                if *n_classes == 2 {
                    push("sensitivity", sensitivity(y, &pred, 1)?);
                    push("specificity", specificity(y, &pred, 1)?);
                    push("f1", f1(y, &pred, 1)?);
                } else {
                    push("f1_macro", macro_f1(y, &pred, *n_classes)?);
                }
                let cm = confusion_matrix(y, &pred, *n_classes)?;
                confusion = Some(match confusion {
                    None => cm,
                    Some(acc) => acc
                        .iter()
                        .zip(&cm)
                        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + q).collect())
                        .collect(),
                });
            }
            Labels::Values(v) => {
                let mut pred = vec![0.0; n];
                for o in chunk {
                    let Prediction::Values(p) = &o.prediction else {
                        unreachable!("regressor returned scores")
                    };
                    for (&value, &i) in p.iter().zip(&o.test) {
                        pred[i] = value;
                    }
                }
                push("r2", r2(v, &pred)?);
                push("mae", mae(v, &pred)?);
                push("rmse", rmse(v, &pred)?);
            }
        }
    }

    let summary = per_repeat
        .iter()
        .map(|(name, values)| {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let ci = ci95(values).ok().map(|(lo, hi)| [lo, hi]);
            (name.clone(), MetricSummary { mean, ci95: ci })
        })
        .collect();

    let (headline, n_classes) = match labels {
        Labels::Classes { n_classes, .. } => ("auc", Some(*n_classes)),
        Labels::Values(_) => ("r2", None),
    };
    Ok(CvResult {
        schema_version: REPORT_SCHEMA_VERSION,
        n_samples: n,
        n_classes,
        repeats: cfg.repeats,
        outer_k: cfg.outer_k,
        inner_k: cfg.inner_k,
        seed,
        headline: headline.to_string(),
        per_repeat,
        summary,
        confusion_matrix: confusion,
        folds: outcomes.into_iter().map(|o| o.choice).collect(),
    })
}
