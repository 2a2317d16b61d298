//! The 38-per-task drawing feature battery and the 190-wide session vector.
//!
//! Feature order is fixed by [`TASK_FEATURE_NAMES`]; session columns are
//! task-major (`SENTENCE`, `PENTAGON`, `TMT_A`, `TMT_B`, `CDT`) and named
//! `"<TASK>.<feature>"`. Missing values are `None` and are never filled in
//! here.

mod extract;
mod kinematics;
pub mod stats;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::stroke::Task;

pub use extract::{extract_session_features, extract_task_features, pause_features, posture_features};
pub use kinematics::{kinematic_series, KinematicSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("smoothing window must be odd, got {0}")]
    EvenWindow(usize),
    #[error("series is empty")]
    Empty,
    #[error("need at least 3 samples for differentiation, got {0}")]
    TooShort(usize),
    #[error("length mismatch: {0} values vs {1} timestamps")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Odd moving-average width applied before differentiation.
    pub smoothing_window: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { smoothing_window: 5 }
    }
}

pub const KINEMATIC_COUNT: usize = 15;
pub const PRESSURE_COUNT: usize = 8;
pub const POSTURE_COUNT: usize = 10;
pub const PAUSE_COUNT: usize = 5;
pub const FEATURES_PER_TASK: usize = KINEMATIC_COUNT + PRESSURE_COUNT + POSTURE_COUNT + PAUSE_COUNT;
pub const SESSION_FEATURES: usize = FEATURES_PER_TASK * Task::ALL.len();

/// Registry order of the per-task features.
pub const TASK_FEATURE_NAMES: [&str; FEATURES_PER_TASK] = [
    // speed / acceleration / jerk
    "speed_median",
    "speed_cv_across",
    "speed_cv_within",
    "speed_extrema_per_length",
    "speed_extrema_per_time",
    "accel_median",
    "accel_cv_across",
    "accel_cv_within",
    "accel_extrema_per_length",
    "accel_extrema_per_time",
    "jerk_median",
    "jerk_cv_across",
    "jerk_cv_within",
    "jerk_extrema_per_length",
    "jerk_extrema_per_time",
    // pressure
    "pressure_median",
    "pressure_cv_across",
    "pressure_cv_within",
    "pressure_extrema_per_length",
    "pressure_extrema_per_time",
    "pressure_rate_median",
    "pressure_rate_cv_across",
    "pressure_rate_cv_within",
    // posture
    "tilt_x_sd_across",
    "tilt_x_sd_within",
    "tilt_x_rate_abs_median",
    "tilt_x_rate_cv_across",
    "tilt_x_rate_cv_within",
    "tilt_y_sd_across",
    "tilt_y_sd_within",
    "tilt_y_rate_abs_median",
    "tilt_y_rate_cv_across",
    "tilt_y_rate_cv_within",
    // pauses
    "pause_mean",
    "pause_cv",
    "n_drawings",
    "pause_drawing_ratio",
    "adjusted_total_duration",
];

/// Feature family, in registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Kinematic,
    Pressure,
    Posture,
    Pause,
}

pub fn family_of(index: usize) -> Family {
    match index {
        i if i < KINEMATIC_COUNT => Family::Kinematic,
        i if i < KINEMATIC_COUNT + PRESSURE_COUNT => Family::Pressure,
        i if i < KINEMATIC_COUNT + PRESSURE_COUNT + POSTURE_COUNT => Family::Posture,
        _ => Family::Pause,
    }
}

pub fn task_feature_index(name: &str) -> Option<usize> {
    TASK_FEATURE_NAMES.iter().position(|n| *n == name)
}

/// All 190 session column names in order.
pub fn session_columns() -> Vec<String> {
    Task::ALL
        .iter()
        .flat_map(|t| TASK_FEATURE_NAMES.iter().map(move |f| format!("{}.{}", t.as_str(), f)))
        .collect()
}

/// Hex SHA-256 over the ordered column names; identifies the registry in
/// persisted model bundles.
pub fn registry_hash() -> String {
    let mut h = Sha256::new();
    for c in session_columns() {
        h.update(c.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// The 38 features of one task recording.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskFeatures {
    values: [Option<f64>; FEATURES_PER_TASK],
}

impl TaskFeatures {
    pub fn missing() -> Self {
        TaskFeatures {
            values: [None; FEATURES_PER_TASK],
        }
    }

    pub fn values(&self) -> &[Option<f64>; FEATURES_PER_TASK] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        task_feature_index(name).and_then(|i| self.values[i])
    }
}

/// Task-major concatenation of five [`TaskFeatures`] blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionFeatureVector {
    pub session_id: String,
    values: Vec<Option<f64>>,
}

impl SessionFeatureVector {
    pub fn from_values(session_id: impl Into<String>, values: Vec<Option<f64>>) -> Option<Self> {
        (values.len() == SESSION_FEATURES).then(|| SessionFeatureVector {
            session_id: session_id.into(),
            values,
        })
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn missing_mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_none).collect()
    }

    pub fn task_block(&self, task: Task) -> &[Option<f64>] {
        let start = task.index() * FEATURES_PER_TASK;
        &self.values[start..start + FEATURES_PER_TASK]
    }

    pub fn get(&self, task: Task, name: &str) -> Option<f64> {
        task_feature_index(name).and_then(|i| self.task_block(task)[i])
    }

    /// Values with `NaN` standing in for missing entries.
    pub fn to_nan_row(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
    }
}
