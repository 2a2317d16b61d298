//! JSON run configuration shared by the command line and the service.
//!
//! Every field is optional; omitted fields take the protocol defaults.
//!
//! ```json
//! {
//!   "features": { "smoothing_window": 5 },
//!   "evaluation": {
//!     "repeats": 10, "outer_k": 5, "inner_k": 5,
//!     "selection_c": 0.1, "regression_selector": "lasso",
//!     "families": ["elastic_net", "random_forest", "svm"],
//!     "grid": { "svm": { "c": [1, 10] } },
//!     "fit": { "n_trees": 100 }
//!   }
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::CvConfig;
use crate::features::FeatureConfig;
use crate::learners::ModelFamily;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Malformed(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub features: FeatureConfig,
    pub evaluation: CvConfig,
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let w = self.features.smoothing_window;
        if w == 0 || w % 2 == 0 {
            return bad(format!("smoothing_window must be odd and positive, got {w}"));
        }
        let e = &self.evaluation;
        if e.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        if e.outer_k < 2 || e.inner_k < 2 {
            return bad("fold counts must be at least 2".into());
        }
        if !(e.selection_c > 0.0 && e.selection_c.is_finite()) {
            return bad(format!("selection_c must be positive, got {}", e.selection_c));
        }
        if e.families.is_empty() {
            return bad("families must not be empty".into());
        }
        if e.fit.n_trees == 0 {
            return bad("n_trees must be at least 1".into());
        }
        if !(e.fit.solver_tol > 0.0 && e.fit.solver_tol.is_finite()) || e.fit.solver_max_sweeps == 0 {
            return bad("solver tolerance and sweep limit must be positive".into());
        }
        let g = &e.grid;
        let positive = |v: &[f64]| !v.is_empty() && v.iter().all(|&x| x > 0.0 && x.is_finite());
        for family in &e.families {
            let ok = match family {
                ModelFamily::ElasticNet => {
                    positive(&g.elastic_net.c)
                        && !g.elastic_net.alpha.is_empty()
                        && g.elastic_net.alpha.iter().all(|a| (0.0..=1.0).contains(a))
                }
                ModelFamily::RandomForest => {
                    !g.random_forest.max_depth.is_empty()
                        && !g.random_forest.max_features.is_empty()
                        && g.random_forest.max_depth.iter().chain(&g.random_forest.max_features).all(|&v| v >= 1)
                }
                ModelFamily::Svm => !g.svm.kernel.is_empty() && positive(&g.svm.c) && positive(&g.svm.gamma),
            };
            if !ok {
                return bad(format!("grid for {family:?} is empty or out of range"));
            }
        }
        Ok(())
    }
}

pub fn parse_config(bytes: &[u8]) -> Result<Config, ConfigError> {
    let cfg: Config = serde_json::from_slice(bytes).map_err(|e| ConfigError::Malformed(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
