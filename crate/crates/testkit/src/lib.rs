//! Slow, literal reference implementations for cross-checking the toolkit.
//!
//! Nothing here depends on `inkscreen-core`: inputs are plain tuples and
//! slices so that a shared bug cannot hide on both sides of a comparison.

pub mod features;
pub mod fit;
pub mod metrics;
pub mod recordings;

/// `|a - b| <= tol * max(|a|, |b|)`, with exact equality for zeros.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
