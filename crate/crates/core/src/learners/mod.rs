//! From-scratch learners and in-pipeline preprocessing.
//!
//! Three model families are available for both classification and
//! regression: elastic-net GLMs ([`glm`]), random forests ([`forest`]) and
//! kernel SVMs ([`svm`]). Classification always uses balanced class weights.

pub mod forest;
pub mod glm;
mod model;
mod preprocess;
mod select;
pub mod svm;
mod weights;

use thiserror::Error;

pub use model::{fit_model, FitOptions, FittedModel, HyperParams, KernelKind, Labels, ModelFamily, Prediction};
pub use preprocess::Preprocessor;
pub use select::{l1_select_features, SelectorFlavor, FALLBACK_FEATURES};
pub use weights::ClassWeights;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("need at least two training rows")]
    NoRows,
    #[error("no labels")]
    EmptyLabels,
    #[error("l1 ratio {0} outside [0, 1]")]
    BadAlpha(f64),
    #[error("C must be positive and finite, got {0}")]
    BadC(f64),
    #[error("gamma must be positive and finite, got {0}")]
    BadGamma(f64),
    #[error("unsupported kernel {0:?}")]
    BadKernel(String),
    #[error("max_depth must be at least 1, got {0}")]
    BadDepth(usize),
    #[error("max_features must be at least 1, got {0}")]
    BadMaxFeatures(usize),
    #[error("forest needs at least one tree")]
    BadTreeCount,
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("model does not support this kind of prediction")]
    WrongTask,
}
