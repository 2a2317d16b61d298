use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::LearnError;
use crate::features::stats::median;

const SD_FLOOR: f64 = 1e-12;

/// Train-fold imputation medians and standardization statistics.
///
/// Missing entries are `NaN`. They are replaced by the column median of the
/// observed training values (0 when a column was never observed), then every
/// column is z-scored with the population mean and SD of the imputed
/// training column. Columns with zero spread use an SD of 1.
///
/// Values outside the imputed training range are clipped to it first. Some
/// CV features divide by a mean that can sit near zero, and a single unseen
/// value hundreds of SDs out would otherwise dominate a linear prediction.
/// Training rows are never clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    medians: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
    lows: Vec<f64>,
    highs: Vec<f64>,
}

impl Preprocessor {
    pub fn fit(x: ArrayView2<f64>) -> Result<Self, LearnError> {
        if x.nrows() < 2 {
            return Err(LearnError::NoRows);
        }
        let n = x.nrows() as f64;
        let mut medians = Vec::with_capacity(x.ncols());
        let mut means = Vec::with_capacity(x.ncols());
        let mut sds = Vec::with_capacity(x.ncols());
        let mut lows = Vec::with_capacity(x.ncols());
        let mut highs = Vec::with_capacity(x.ncols());
        for col in x.columns() {
            let observed: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
            if observed.iter().any(|v| v.is_infinite()) {
                return Err(LearnError::NonFinite);
            }
            let med = median(&observed).unwrap_or(0.0);
            let filled: Vec<f64> = col.iter().map(|&v| if v.is_nan() { med } else { v }).collect();
            let mean = filled.iter().sum::<f64>() / n;
            let var = filled.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let sd = var.sqrt();
            medians.push(med);
            means.push(mean);
            sds.push(if sd > SD_FLOOR { sd } else { 1.0 });
            lows.push(filled.iter().copied().fold(f64::INFINITY, f64::min));
            highs.push(filled.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Preprocessor {
            medians,
            means,
            sds,
            lows,
            highs,
        })
    }

    pub fn n_features(&self) -> usize {
        self.medians.len()
    }

    pub fn medians(&self) -> &[f64] {
        &self.medians
    }

    /// Equal-length, finite statistics with positive SDs and ordered ranges.
    pub fn is_consistent(&self) -> bool {
        let n = self.medians.len();
        [self.means.len(), self.sds.len(), self.lows.len(), self.highs.len()].iter().all(|&l| l == n)
            && self.medians.iter().chain(&self.means).chain(&self.lows).chain(&self.highs).all(|v| v.is_finite())
            && self.sds.iter().all(|&s| s.is_finite() && s > 0.0)
            && self.lows.iter().zip(&self.highs).all(|(lo, hi)| lo <= hi)
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, LearnError> {
        if x.ncols() != self.n_features() {
            return Err(LearnError::ShapeMismatch {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            for v in col.iter_mut() {
                let filled = if v.is_nan() { self.medians[j] } else { v.clamp(self.lows[j], self.highs[j]) };
                *v = (filled - self.means[j]) / self.sds[j];
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite);
        }
        Ok(out)
    }
}
