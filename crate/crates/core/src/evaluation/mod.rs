//! Repeated nested cross-validation, metrics and permutation testing.

mod folds;
mod grid;
pub mod metrics;
mod nested;
mod permutation;
mod target;

use thiserror::Error;

use crate::learners::LearnError;

pub use folds::{kfold_for, quantile_strata, stratified_kfold, FoldPlan};
pub use grid::{inner_grid_search, objective, ElasticNetGrid, ForestGrid, HyperGrid, SvmGrid};
pub use metrics::ci95;
pub use nested::{
    fit_pipeline, nested_cv, Access, CvConfig, CvResult, FittedPipeline, FoldChoice, MetricSummary, Observer, Stage,
    REPORT_SCHEMA_VERSION,
};
pub use permutation::{permutation_p_value, permutation_test, permute_labels, PermutationResult};
pub use target::Target;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("class {class} has {count} members, fewer than the {k} folds")]
    TooFewPerClass { class: usize, count: usize, k: usize },
    #[error("{n} samples cannot fill {k} folds")]
    TooFewSamples { n: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    BadFoldCount(usize),
    #[error("at least one repeat is required")]
    BadRepeatCount,
    #[error("need at least two values, got {0}")]
    TooFew(usize),
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("AUC needs both classes in the truth")]
    DegenerateAuc,
    #[error("class absent from the truth")]
    MissingClass,
    #[error("class {0} outside the label range")]
    ClassOutOfRange(usize),
    #[error("R² is undefined for a constant truth")]
    ConstantTruth,
    #[error("scores contain NaN")]
    NonFinite,
    #[error("empty hyperparameter grid")]
    EmptyGrid,
    #[error("no model families configured")]
    NoFamilies,
    #[error("permutation count must be at least 1")]
    BadPermCount,
    #[error(transparent)]
    Learn(#[from] LearnError),
}
