//! Numeric primitives shared by the feature families.

use super::FeatureError;

/// Centered moving average. Near the ends the window is truncated to the
/// samples that exist, so the output has the input's length.
pub fn smooth(series: &[f64], window: usize) -> Result<Vec<f64>, FeatureError> {
    if window % 2 == 0 {
        return Err(FeatureError::EvenWindow(window));
    }
    if series.is_empty() {
        return Err(FeatureError::Empty);
    }
    let half = window / 2;
    let n = series.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let sum: f64 = series[lo..=hi].iter().sum();
            sum / (hi - lo + 1) as f64
        })
        .collect())
}

/// Largest odd window not exceeding `n`, capped at `window`.
///
/// With the window no wider than the series, truncated means of a strictly
/// increasing sequence stay strictly increasing.
pub fn effective_window(window: usize, n: usize) -> usize {
    let cap = if n % 2 == 1 { n } else { n.saturating_sub(1) };
    window.min(cap).max(1)
}

/// First derivative on nonuniform timestamps: two-point central differences
/// inside, one-sided differences at both ends.
pub fn differentiate(values: &[f64], t: &[f64]) -> Result<Vec<f64>, FeatureError> {
    let n = values.len();
    if n != t.len() {
        return Err(FeatureError::LengthMismatch(n, t.len()));
    }
    if n < 3 {
        return Err(FeatureError::TooShort(n));
    }
    let mut out = Vec::with_capacity(n);
    out.push((values[1] - values[0]) / (t[1] - t[0]));
    for i in 1..n - 1 {
        out.push((values[i + 1] - values[i - 1]) / (t[i + 1] - t[i - 1]));
    }
    out.push((values[n - 1] - values[n - 2]) / (t[n - 1] - t[n - 2]));
    Ok(out)
}

/// Componentwise [`differentiate`] of a planar sequence.
pub fn differentiate_planar(
    x: &[f64],
    y: &[f64],
    t: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), FeatureError> {
    Ok((differentiate(x, t)?, differentiate(y, t)?))
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// Median; even counts average the two central values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Median over the concatenation of every stroke's values.
pub fn pooled_median<S: AsRef<[f64]>>(per_stroke: &[S]) -> Option<f64> {
    let all: Vec<f64> = per_stroke.iter().flat_map(|s| s.as_ref().iter().copied()).collect();
    median(&all)
}

/// Coefficient of variation: sample SD over mean. Missing for fewer than
/// two values or when the mean is negligible against the largest magnitude.
pub fn cv(values: &[f64]) -> Option<f64> {
    let sd = sample_sd(values)?;
    let m = mean(values)?;
    let max_abs = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m.abs() <= 1e-12 * max_abs {
        return None;
    }
    Some(sd / m)
}

/// CV of the per-stroke means.
pub fn cv_across_strokes<S: AsRef<[f64]>>(per_stroke: &[S]) -> Option<f64> {
    let means: Option<Vec<f64>> = per_stroke.iter().map(|s| mean(s.as_ref())).collect();
    cv(&means?)
}

/// Unweighted mean of the per-stroke CVs, skipping strokes whose CV is missing.
pub fn cv_within_strokes<S: AsRef<[f64]>>(per_stroke: &[S]) -> Option<f64> {
    let cvs: Vec<f64> = per_stroke.iter().filter_map(|s| cv(s.as_ref())).collect();
    mean(&cvs)
}

/// Interior local extrema. Runs of equal values collapse to one point first,
/// so a plateau between a rise and a fall counts once.
pub fn count_local_extrema(series: &[f64]) -> usize {
    let mut collapsed: Vec<f64> = Vec::with_capacity(series.len());
    for &v in series {
        if collapsed.last() != Some(&v) {
            collapsed.push(v);
        }
    }
    collapsed
        .windows(3)
        .filter(|w| (w[1] > w[0] && w[1] > w[2]) || (w[1] < w[0] && w[1] < w[2]))
        .count()
}
