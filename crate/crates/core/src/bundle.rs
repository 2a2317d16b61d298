//! Trained screening pipelines persisted as versioned JSON.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::FeatureTable;
use crate::evaluation::{fit_pipeline, CvConfig, EvalError, FittedPipeline, Target};
use crate::features::{registry_hash, FeatureConfig};
use crate::learners::{LearnError, Prediction};
use crate::seed::derive_seed;
use crate::stroke::{Diagnosis, SubjectRecord};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;
pub const MMSE_RANGE: (f64, f64) = (0.0, 30.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("malformed bundle: {0}")]
    Malformed(String),
    #[error("bundle format version {found} is not supported (expected {expected})")]
    BundleVersionMismatch { found: u64, expected: u32 },
    #[error("bundle was built on feature registry {found}, this build uses {expected}")]
    RegistryHashMismatch { found: String, expected: String },
    #[error("target {0} has no labelled rows")]
    NoLabels(Target),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<LearnError> for BundleError {
    fn from(e: LearnError) -> Self {
        BundleError::Eval(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    /// RFC 3339 timestamp supplied by the caller.
    pub created_at: String,
    /// SHA-256 over the training ids and feature bits.
    pub dataset_fingerprint: String,
    pub n_samples: usize,
    /// Optional CV summaries keyed by target, then metric.
    #[serde(default)]
    pub cv_metrics: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedBundle {
    pub format_version: u32,
    pub registry_hash: String,
    pub features: FeatureConfig,
    pub diagnosis: FittedPipeline,
    pub mmse: FittedPipeline,
    pub mtl: FittedPipeline,
    pub metadata: TrainingMetadata,
}

/// Per-session output of a bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningPrediction {
    /// Probabilities for CN, MCI and DEMENTIA.
    pub probabilities: BTreeMap<Diagnosis, f64>,
    pub predicted_diagnosis: Diagnosis,
    pub mmse: f64,
    pub mtl_atrophy_z: f64,
}

pub fn dataset_fingerprint(table: &FeatureTable) -> String {
    let mut h = Sha256::new();
    for (id, row) in table.ids.iter().zip(table.values.rows()) {
        h.update(id.as_bytes());
        h.update([0]);
        for v in row {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn fit_target(
    table: &FeatureTable,
    subjects: &[SubjectRecord],
    target: Target,
    cfg: &CvConfig,
    seed: u64,
) -> Result<FittedPipeline, BundleError> {
    let (rows, labels) = target.labels(subjects);
    if rows.is_empty() {
        return Err(BundleError::NoLabels(target));
    }
    let x = table.values.select(ndarray::Axis(0), &rows);
    Ok(fit_pipeline(x.view(), &labels, cfg, derive_seed(seed, &[target as u64]), &mut |_| {})?)
}

/// Fits the diagnosis, MMSE and MTL pipelines on every labelled row.
pub fn train_bundle(
    table: &FeatureTable,
    subjects: &[SubjectRecord],
    features: FeatureConfig,
    cfg: &CvConfig,
    seed: u64,
    created_at: String,
) -> Result<TrainedBundle, BundleError> {
    Ok(TrainedBundle {
        format_version: BUNDLE_FORMAT_VERSION,
        registry_hash: registry_hash(),
        features,
        diagnosis: fit_target(table, subjects, Target::Diagnosis, cfg, seed)?,
        mmse: fit_target(table, subjects, Target::Mmse, cfg, seed)?,
        mtl: fit_target(table, subjects, Target::Mtl, cfg, seed)?,
        metadata: TrainingMetadata {
            seed,
            created_at,
            dataset_fingerprint: dataset_fingerprint(table),
            n_samples: table.len(),
            cv_metrics: BTreeMap::new(),
        },
    })
}

impl TrainedBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    /// Parses a bundle, rejecting other format versions and feature
    /// registries before decoding the models.
    pub fn from_json(bytes: &[u8]) -> Result<Self, BundleError> {
        let raw: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| BundleError::Malformed(e.to_string()))?;
        let version = raw
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| BundleError::Malformed("missing format_version".into()))?;
        if version != u64::from(BUNDLE_FORMAT_VERSION) {
            return Err(BundleError::BundleVersionMismatch {
                found: version,
                expected: BUNDLE_FORMAT_VERSION,
            });
        }
        let found = raw
            .get("registry_hash")
            .and_then(|v| v.as_str())
            .ok_or_else(|| BundleError::Malformed("missing registry_hash".into()))?;
        let expected = registry_hash();
        if found != expected {
            return Err(BundleError::RegistryHashMismatch {
                found: found.to_string(),
                expected,
            });
        }
        let bundle: TrainedBundle = serde_json::from_value(raw).map_err(|e| BundleError::Malformed(e.to_string()))?;
        bundle.check()?;
        Ok(bundle)
    }

    fn check(&self) -> Result<(), BundleError> {
        let n = crate::features::SESSION_FEATURES;
        for (name, p) in [("diagnosis", &self.diagnosis), ("mmse", &self.mmse), ("mtl", &self.mtl)] {
            let bad = |m: &str| Err(BundleError::Malformed(format!("{name} pipeline: {m}")));
            if !p.preprocessor.is_consistent() || p.preprocessor.n_features() != n {
                return bad("preprocessor width differs from the registry");
            }
            if p.selected.iter().any(|&j| j >= n) || p.selected.windows(2).any(|w| w[0] >= w[1]) {
                return bad("selected indices out of range or unsorted");
            }
            if p.model.n_features() != Some(p.selected.len()) {
                return bad("model width differs from the selection");
            }
            if let Err(m) = p.model.validate() {
                return bad(&m);
            }
        }
        if self.diagnosis.model.n_classes() != Some(3) || self.mmse.model.n_classes().is_some() || self.mtl.model.n_classes().is_some() {
            return Err(BundleError::Malformed("pipeline kinds do not match their targets".into()));
        }
        if self.features.smoothing_window % 2 == 0 {
            return Err(BundleError::Malformed("even smoothing window".into()));
        }
        Ok(())
    }

    /// Predictions for raw feature rows (`NaN` = missing).
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ScreeningPrediction>, BundleError> {
        let probs = self.diagnosis.predict_proba(x)?;
        let values = |p: &FittedPipeline| -> Result<Vec<f64>, BundleError> {
            match p.predict(x)? {
                Prediction::Values(v) => Ok(v),
                Prediction::Scores(_) => Err(LearnError::WrongTask.into()),
            }
        };
        let mmse = values(&self.mmse)?;
        let mtl = values(&self.mtl)?;
        Ok(probs
            .rows()
            .into_iter()
            .zip(mmse.into_iter().zip(mtl))
            .map(|(p, (m, z))| {
                let best = crate::evaluation::metrics::argmax(p.iter().copied());
                ScreeningPrediction {
                    probabilities: Diagnosis::ALL.iter().map(|d| (*d, p[d.index()])).collect(),
                    predicted_diagnosis: Diagnosis::ALL[best],
                    mmse: m.clamp(MMSE_RANGE.0, MMSE_RANGE.1),
                    mtl_atrophy_z: z,
                }
            })
            .collect())
    }
}
