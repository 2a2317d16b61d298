//! Elastic-net penalized generalized linear models fitted by cyclic
//! coordinate descent.
//!
//! For sample weights `s`, `N` rows and `S = Σ s`, the solver minimizes
//!
//! ```text
//! J(w, b) = (1/S) Σ s_i ℓ_i  +  1/(C·N) · ( α ‖w‖₁ + (1 − α)/2 ‖w‖₂² )
//! ```
//!
//! with `ℓ` the cross-entropy of `sigmoid(b + x·w)` (logistic) or
//! `½ (y − b − x·w)²` (linear). The intercept is not penalized. Normalizing
//! the loss by `S` makes the fit invariant to a common rescaling of the
//! weights; scaling the penalty by `1/(C·N)` gives `C` the usual meaning of
//! an inverse strength on the summed loss.
//!
//! Each coordinate step minimizes a quadratic model with the exact curvature
//! and applies soft-thresholding. For the logistic loss that step is kept
//! only if it lowers `J`; otherwise the step under the global curvature bound
//! `x²/4` is taken, which always does. `J` therefore never increases.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GlmFlavor {
    Logistic,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once no coefficient moves more than this in a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-5,
            max_sweeps: 10_000,
        }
    }
}

/// Weights and intercept of one linear score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPredictor {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearPredictor {
    pub fn score(&self, row: ArrayView1<f64>) -> f64 {
        self.intercept + self.weights.iter().zip(row.iter()).map(|(w, x)| w * x).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub predictor: LinearPredictor,
    pub sweeps: usize,
    pub converged: bool,
    /// `J` before the first sweep and after each sweep.
    pub objective_trace: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z)
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

fn loss(flavor: GlmFlavor, eta: f64, y: f64) -> f64 {
    match flavor {
        GlmFlavor::Logistic => softplus(eta) - y * eta,
        GlmFlavor::Linear => 0.5 * (y - eta) * (y - eta),
    }
}

pub(crate) fn check_hyper(alpha: f64, c: f64) -> Result<(), LearnError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LearnError::BadAlpha(alpha));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(LearnError::BadC(c));
    }
    Ok(())
}

/// Smooth part of `J`, its penalty, and the data needed to evaluate both.
pub struct Problem<'a> {
    pub flavor: GlmFlavor,
    pub x: ArrayView2<'a, f64>,
    pub y: &'a [f64],
    pub sample_weight: &'a [f64],
    pub alpha: f64,
    pub c: f64,
}

impl Problem<'_> {
    fn weight_total(&self) -> f64 {
        self.sample_weight.iter().sum()
    }

    fn penalties(&self) -> (f64, f64) {
        let scale = 1.0 / (self.c * self.x.nrows() as f64);
        (self.alpha * scale, (1.0 - self.alpha) * scale)
    }

    /// Weighted mean loss at the given coefficients.
    pub fn smooth_loss(&self, p: &LinearPredictor) -> f64 {
        let total: f64 = self
            .x
            .rows()
            .into_iter()
            .zip(self.y)
            .zip(self.sample_weight)
            .map(|((row, &y), &s)| s * loss(self.flavor, p.score(row), y))
            .sum();
        total / self.weight_total()
    }

    pub fn penalty(&self, p: &LinearPredictor) -> f64 {
        let (l1, l2) = self.penalties();
        let a: f64 = p.weights.iter().map(|w| w.abs()).sum();
        let b: f64 = p.weights.iter().map(|w| w * w).sum();
        l1 * a + 0.5 * l2 * b
    }

    pub fn objective(&self, p: &LinearPredictor) -> f64 {
        self.smooth_loss(p) + self.penalty(p)
    }

    /// (L1, L2) coefficients multiplying ‖w‖₁ and ½‖w‖₂².
    pub fn penalty_strengths(&self) -> (f64, f64) {
        self.penalties()
    }

    fn validate(&self) -> Result<(), LearnError> {
        check_hyper(self.alpha, self.c)?;
        let n = self.x.nrows();
        if n == 0 {
            return Err(LearnError::NoRows);
        }
        if self.y.len() != n || self.sample_weight.len() != n {
            return Err(LearnError::ShapeMismatch {
                expected: n,
                got: self.y.len().min(self.sample_weight.len()),
            });
        }
        let finite = self.x.iter().chain(self.y).chain(self.sample_weight).all(|v| v.is_finite());
        if !finite || self.sample_weight.iter().any(|&s| s < 0.0) {
            return Err(LearnError::NonFinite);
        }
        if self.weight_total() <= 0.0 {
            return Err(LearnError::EmptyLabels);
        }
        Ok(())
    }

    pub fn solve(&self, opts: SolverOptions) -> Result<Solution, LearnError> {
        self.validate()?;
        let n = self.x.nrows();
        let p = self.x.ncols();
        let s_total = self.weight_total();
        let (l1, l2) = self.penalties();
        let cols: Vec<Vec<f64>> = self.x.columns().into_iter().map(|c| c.to_vec()).collect();
        let sw = self.sample_weight;
        let y = self.y;

        let weighted_mean_y = y.iter().zip(sw).map(|(y, s)| y * s).sum::<f64>() / s_total;
        let intercept = match self.flavor {
            GlmFlavor::Linear => weighted_mean_y,
            GlmFlavor::Logistic => {
                let r = weighted_mean_y.clamp(1e-10, 1.0 - 1e-10);
                (r / (1.0 - r)).ln()
            }
        };
        let mut pred = LinearPredictor {
            weights: vec![0.0; p],
            intercept,
        };
        let mut eta = vec![intercept; n];
        let flavor = self.flavor;
        let data_loss = |eta: &[f64]| -> f64 {
            eta.iter()
                .zip(y)
                .zip(sw)
                .map(|((&e, &yi), &s)| s * loss(flavor, e, yi))
                .sum::<f64>()
                / s_total
        };
        let coord_penalty = |w: f64| l1 * w.abs() + 0.5 * l2 * w * w;

        let mut trace = vec![data_loss(&eta) + self.penalty(&pred)];
        let mut converged = false;
        let mut sweeps = 0;
        let mut trial = vec![0.0; n];

        // One coordinate update along direction `col` (None = intercept).
        let mut step = |col: Option<&[f64]>, current: f64, eta: &mut Vec<f64>| -> f64 {
            let xv = |i: usize| col.map_or(1.0, |c| c[i]);
            let (lam1, lam2) = if col.is_some() { (l1, l2) } else { (0.0, 0.0) };
            let mut grad = 0.0;
            let mut curv = 0.0;
            let mut bound = 0.0;
            for i in 0..n {
                let x = xv(i);
                let s = sw[i];
                match flavor {
                    GlmFlavor::Linear => {
                        grad += s * x * (eta[i] - y[i]);
                        curv += s * x * x;
                    }
                    GlmFlavor::Logistic => {
                        let mu = sigmoid(eta[i]);
                        grad += s * x * (mu - y[i]);
                        curv += s * x * x * mu * (1.0 - mu);
                        bound += s * x * x * 0.25;
                    }
                }
            }
            grad /= s_total;
            curv /= s_total;
            bound /= s_total;
            let propose = |h: f64| -> f64 {
                if h + lam2 <= 0.0 {
                    return current;
                }
                soft_threshold(h * current - grad, lam1) / (h + lam2)
            };
            let apply = |target: f64, eta: &[f64], out: &mut Vec<f64>| {
                let d = target - current;
                for i in 0..n {
                    out[i] = eta[i] + d * xv(i);
                }
            };
            let penalty_of = |w: f64| if col.is_some() { coord_penalty(w) } else { 0.0 };
            match flavor {
                GlmFlavor::Linear => {
                    let next = propose(curv);
                    if next != current {
                        apply(next, eta, &mut trial);
                        std::mem::swap(eta, &mut trial);
                    }
                    next
                }
                GlmFlavor::Logistic => {
                    let before = data_loss(eta) + penalty_of(current);
                    for h in [curv, bound] {
                        let next = propose(h.max(1e-12));
                        if next == current {
                            return current;
                        }
                        apply(next, eta, &mut trial);
                        if data_loss(&trial) + penalty_of(next) <= before {
                            std::mem::swap(eta, &mut trial);
                            return next;
                        }
                    }
                    current
                }
            }
        };

        while sweeps < opts.max_sweeps {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for (j, col) in cols.iter().enumerate() {
                let old = pred.weights[j];
                let new = step(Some(col), old, &mut eta);
                pred.weights[j] = new;
                max_change = max_change.max((new - old).abs());
            }
            let old = pred.intercept;
            pred.intercept = step(None, old, &mut eta);
            max_change = max_change.max((pred.intercept - old).abs());
            trace.push(data_loss(&eta) + self.penalty(&pred));
            if max_change < opts.tol {
                converged = true;
                break;
            }
        }
        Ok(Solution {
            predictor: pred,
            sweeps,
            converged,
            objective_trace: trace,
        })
    }
}

/// A fitted elastic-net GLM. Logistic models with more than two classes hold
/// one one-vs-rest predictor per class; binary logistic models hold a single
/// predictor for class 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticNetGlm {
    pub flavor: GlmFlavor,
    pub alpha: f64,
    pub c: f64,
    pub n_features: usize,
    /// 0 for the linear flavor.
    pub n_classes: usize,
    pub predictors: Vec<LinearPredictor>,
}

/// Fits a logistic model on class labels `0..n_classes`.
pub fn fit_logistic(
    x: ArrayView2<f64>,
    y: &[usize],
    n_classes: usize,
    alpha: f64,
    c: f64,
    sample_weight: &[f64],
    opts: SolverOptions,
) -> Result<ElasticNetGlm, LearnError> {
    check_hyper(alpha, c)?;
    if n_classes < 2 {
        return Err(LearnError::SingleClass);
    }
    let targets: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
    let predictors = targets
        .into_iter()
        .map(|k| {
            let yk: Vec<f64> = y.iter().map(|&c| f64::from(u8::from(c == k))).collect();
            Problem {
                flavor: GlmFlavor::Logistic,
                x,
                y: &yk,
                sample_weight,
                alpha,
                c,
            }
            .solve(opts)
            .map(|s| s.predictor)
        })
        .collect::<Result<_, _>>()?;
    Ok(ElasticNetGlm {
        flavor: GlmFlavor::Logistic,
        alpha,
        c,
        n_features: x.ncols(),
        n_classes,
        predictors,
    })
}

pub fn fit_linear(
    x: ArrayView2<f64>,
    y: &[f64],
    alpha: f64,
    c: f64,
    sample_weight: &[f64],
    opts: SolverOptions,
) -> Result<ElasticNetGlm, LearnError> {
    let sol = Problem {
        flavor: GlmFlavor::Linear,
        x,
        y,
        sample_weight,
        alpha,
        c,
    }
    .solve(opts)?;
    Ok(ElasticNetGlm {
        flavor: GlmFlavor::Linear,
        alpha,
        c,
        n_features: x.ncols(),
        n_classes: 0,
        predictors: vec![sol.predictor],
    })
}

impl ElasticNetGlm {
    fn check_shape(&self, x: ArrayView2<f64>) -> Result<(), LearnError> {
        if x.ncols() != self.n_features {
            return Err(LearnError::ShapeMismatch {
                expected: self.n_features,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Class probabilities, one row per sample. Binary models return
    /// `[1 − p, p]`; one-vs-rest models normalize the per-class sigmoids.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, LearnError> {
        self.check_shape(x)?;
        if self.flavor != GlmFlavor::Logistic {
            return Err(LearnError::WrongTask);
        }
        let mut out = Array2::zeros((x.nrows(), self.n_classes));
        for (i, row) in x.rows().into_iter().enumerate() {
            if self.n_classes == 2 {
                let p = sigmoid(self.predictors[0].score(row));
                out[[i, 0]] = 1.0 - p;
                out[[i, 1]] = p;
            } else {
                let raw: Vec<f64> = self.predictors.iter().map(|m| sigmoid(m.score(row))).collect();
                let total: f64 = raw.iter().sum();
                for (k, r) in raw.iter().enumerate() {
                    out[[i, k]] = r / total;
                }
            }
        }
        Ok(out)
    }

    /// Real-valued predictions of a linear model.
    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>, LearnError> {
        self.check_shape(x)?;
        if self.flavor != GlmFlavor::Linear {
            return Err(LearnError::WrongTask);
        }
        Ok(x.rows().into_iter().map(|r| self.predictors[0].score(r)).collect())
    }

    /// Largest absolute weight per feature over all predictors.
    pub fn weight_magnitudes(&self) -> Vec<f64> {
        (0..self.n_features)
            .map(|j| self.predictors.iter().map(|p| p.weights[j].abs()).fold(0.0, f64::max))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(seed: u64, n: usize, p: usize) -> (Array2<f64>, Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0));
        let y = (0..n)
            .map(|i| f64::from(u8::from(x[[i, 0]] - 0.5 * x[[i, 1 % p]] + rng.random_range(-1.0..1.0) > 0.0)))
            .collect();
        let w = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        (x, y, w)
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..10 {
            let (x, y, w) = random_problem(seed, 40, 6);
            for flavor in [GlmFlavor::Logistic, GlmFlavor::Linear] {
                let prob = Problem {
                    flavor,
                    x: x.view(),
                    y: &y,
                    sample_weight: &w,
                    alpha: 0.5,
                    c: 0.5,
                };
                let sol = prob.solve(SolverOptions::default()).unwrap();
                assert!(sol.converged);
                for pair in sol.objective_trace.windows(2) {
                    assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs(), "{pair:?}");
                }
            }
        }
    }

    #[test]
    fn strong_penalty_gives_null_model() {
        let (x, y, _) = random_problem(3, 30, 4);
        let ones = vec![1.0; 30];
        let m = fit_logistic(x.view(), &y.iter().map(|&v| v as usize).collect::<Vec<_>>(), 2, 0.5, 1e-6, &ones, SolverOptions::default()).unwrap();
        assert!(m.predictors[0].weights.iter().all(|w| *w == 0.0));
        let rate = y.iter().sum::<f64>() / 30.0;
        assert!((m.predictors[0].intercept - (rate / (1.0 - rate)).ln()).abs() < 1e-4);

        let lin = fit_linear(x.view(), &y, 1.0, 1e-6, &ones, SolverOptions::default()).unwrap();
        assert!(lin.predictors[0].weights.iter().all(|w| *w == 0.0));
        assert!((lin.predictors[0].intercept - rate).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let x = array![[1.0], [2.0]];
        let y = [0.0, 1.0];
        let w = [1.0, 1.0];
        assert_eq!(fit_linear(x.view(), &y, 1.5, 1.0, &w, SolverOptions::default()), Err(LearnError::BadAlpha(1.5)));
        assert_eq!(fit_linear(x.view(), &y, 0.5, 0.0, &w, SolverOptions::default()), Err(LearnError::BadC(0.0)));
        let bad = array![[f64::NAN], [2.0]];
        assert_eq!(fit_linear(bad.view(), &y, 0.5, 1.0, &w, SolverOptions::default()), Err(LearnError::NonFinite));
    }

    #[test]
    fn predictions() {
        let zero = ElasticNetGlm {
            flavor: GlmFlavor::Logistic,
            alpha: 1.0,
            c: 1.0,
            n_features: 2,
            n_classes: 2,
            predictors: vec![LinearPredictor { weights: vec![0.0, 0.0], intercept: 0.0 }],
        };
        let p = zero.predict_proba(array![[1.0, -4.0], [3.0, 2.0]].view()).unwrap();
        assert!(p.iter().all(|v| *v == 0.5));
        assert!(zero.predict_proba(array![[1.0]].view()).is_err());

        let lin = ElasticNetGlm {
            flavor: GlmFlavor::Linear,
            alpha: 1.0,
            c: 1.0,
            n_features: 1,
            n_classes: 0,
            predictors: vec![LinearPredictor { weights: vec![2.0], intercept: 1.0 }],
        };
        assert_eq!(lin.predict_values(array![[3.0]].view()).unwrap(), vec![7.0]);
    }

    #[test]
    fn ovr_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = Array2::from_shape_fn((60, 3), |_| rng.random_range(-1.0..1.0));
        let y: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let m = fit_logistic(x.view(), &y, 3, 0.5, 1.0, &vec![1.0; 60], SolverOptions::default()).unwrap();
        let p = m.predict_proba(x.view()).unwrap();
        for row in p.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }
}
