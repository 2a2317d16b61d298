//! Drawing-process analysis for cognitive screening.
//!
//! The pipeline runs from raw digitizer recordings of five drawing tasks
//! ([`stroke`]) through a fixed 190-feature battery ([`features`]) to
//! from-scratch learners ([`learners`]) evaluated under repeated nested
//! cross-validation with permutation testing ([`evaluation`]). [`synth`]
//! generates labelled synthetic cohorts and [`bundle`] persists trained
//! pipelines.

pub mod bundle;
pub mod config;
pub mod dataset;
pub mod evaluation;
pub mod features;
pub mod learners;
pub mod seed;
pub mod stroke;
pub mod synth;
