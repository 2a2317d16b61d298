//! Kernel support vector machines trained by sequential minimal
//! optimization.
//!
//! One dual solver handles both the class-weighted soft-margin classifier and
//! ε-insensitive regression:
//!
//! ```text
//! min ½ aᵀQa + pᵀa   s.t.  yᵀa = 0,  0 ≤ a_i ≤ C_i,   Q_ij = y_i y_j K_ij
//! ```
//!
//! Working pairs are chosen by the maximal-violation rule with second-order
//! gain for the partner; the solver stops when the violation gap drops below
//! the KKT tolerance.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::LearnError;

pub const KKT_TOLERANCE: f64 = 1e-3;
/// Pair updates allowed per dual variable.
pub const MAX_PASSES: usize = 10_000;
/// Tube half-width for regression.
pub const SVR_EPSILON: f64 = 0.1;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, u: ArrayView1<f64>, v: ArrayView1<f64>) -> f64 {
        match *self {
            Kernel::Linear => u.dot(&v),
            Kernel::Rbf { gamma } => {
                let d2: f64 = u.iter().zip(v.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    pub(crate) fn check(&self) -> Result<(), LearnError> {
        if let Kernel::Rbf { gamma } = *self {
            if !(gamma > 0.0) || !gamma.is_finite() {
                return Err(LearnError::BadGamma(gamma));
            }
        }
        Ok(())
    }
}

fn gram(x: ArrayView2<f64>, kernel: Kernel) -> Array2<f64> {
    let n = x.nrows();
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(x.row(i), x.row(j));
            k[[i, j]] = v;
            k[[j, i]] = v;
        }
    }
    k
}

/// Result of the dual solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision offset: f(x) = Σ y_i a_i K(x_i, x) − rho.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// SMO over `len(y)` variables; `kernel_index` maps a variable to its row
/// in the Gram matrix.
fn solve_dual(
    k: &Array2<f64>,
    kernel_index: &[usize],
    y: &[f64],
    p: &[f64],
    upper: &[f64],
    tol: f64,
) -> DualSolution {
    let l = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[[kernel_index[i], kernel_index[j]]];
    let qd: Vec<f64> = (0..l).map(|i| q(i, i)).collect();
    let mut a = vec![0.0; l];
    let mut g = p.to_vec();
    let max_iter = MAX_PASSES.saturating_mul(l.max(1));
    let mut iter = 0;
    let mut converged = false;

    let in_up = |a: &[f64], t: usize| (y[t] > 0.0 && a[t] < upper[t]) || (y[t] < 0.0 && a[t] > 0.0);
    let in_low = |a: &[f64], t: usize| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < upper[t]);

    while iter < max_iter {
        // select i: maximal −y G over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            if in_up(&a, t) && -y[t] * g[t] >= gmax {
                if -y[t] * g[t] > gmax || i_sel.is_none() {
                    gmax = -y[t] * g[t];
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..l {
                if !in_low(&a, t) {
                    continue;
                }
                let v = -y[t] * g[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut quad = qd[i] + qd[t] - 2.0 * y[i] * y[t] * q(i, t);
                    if quad <= 0.0 {
                        quad = TAU;
                    }
                    let obj = -(b * b) / quad;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if gmax - gmin < tol {
            converged = true;
            break;
        }
        iter += 1;

        let (ci, cj) = (upper[i], upper[j]);
        let (old_i, old_j) = (a[i], a[j]);
        let qij = q(i, j);
        if y[i] != y[j] {
            let mut quad = qd[i] + qd[j] + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-g[i] - g[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > ci - cj {
                if a[i] > ci {
                    a[i] = ci;
                    a[j] = ci - diff;
                }
            } else if a[j] > cj {
                a[j] = cj;
                a[i] = cj + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (g[i] - g[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > ci {
                if a[i] > ci {
                    a[i] = ci;
                    a[j] = sum - ci;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > cj {
                if a[j] > cj {
                    a[j] = cj;
                    a[i] = sum - cj;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }
        let (di, dj) = (a[i] - old_i, a[j] - old_j);
        for t in 0..l {
            g[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // offset from free variables, else the midpoint of the feasible range
    let mut free_sum = 0.0;
    let mut n_free = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..l {
        let yg = y[t] * g[t];
        if a[t] >= upper[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            free_sum += yg;
        }
    }
    let rho = if n_free > 0 {
        free_sum / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    };
    DualSolution {
        alpha: a,
        rho,
        iterations: iter,
        converged,
    }
}

/// A kernel expansion `f(x) = Σ coef_i K(sv_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub support_vectors: Array2<f64>,
    /// Signed dual coefficients (`y_i a_i` for classification).
    pub coefficients: Vec<f64>,
    pub bias: f64,
}

impl SvmModel {
    fn from_expansion(x: ArrayView2<f64>, kernel: Kernel, c: f64, coef: Vec<f64>, bias: f64) -> Self {
        let keep: Vec<usize> = (0..coef.len()).filter(|&i| coef[i] != 0.0).collect();
        let mut sv = Array2::zeros((keep.len(), x.ncols()));
        for (r, &i) in keep.iter().enumerate() {
            sv.row_mut(r).assign(&x.row(i));
        }
        SvmModel {
            kernel,
            c,
            support_vectors: sv,
            coefficients: keep.iter().map(|&i| coef[i]).collect(),
            bias,
        }
    }

    pub fn decision(&self, x: ArrayView2<f64>) -> Result<Vec<f64>, LearnError> {
        if x.ncols() != self.support_vectors.ncols() && self.support_vectors.nrows() > 0 {
            return Err(LearnError::ShapeMismatch {
                expected: self.support_vectors.ncols(),
                got: x.ncols(),
            });
        }
        Ok(x.rows()
            .into_iter()
            .map(|row| {
                self.support_vectors
                    .rows()
                    .into_iter()
                    .zip(&self.coefficients)
                    .map(|(sv, c)| c * self.kernel.eval(sv, row))
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }
}

/// Full output of a binary fit, including the dual variables for
/// feasibility checks.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvmFit {
    pub model: SvmModel,
    pub dual: DualSolution,
    /// ±1 labels used by the solver.
    pub signs: Vec<f64>,
    /// Per-sample box bounds `C · w_i`.
    pub upper: Vec<f64>,
}

fn check_c(c: f64) -> Result<(), LearnError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(LearnError::BadC(c));
    }
    Ok(())
}

/// Weighted soft-margin classifier. `positive[i]` marks class +1. Sample
/// weights are rescaled to mean 1 before scaling the box, so only their
/// ratios matter.
pub fn fit_svm(
    x: ArrayView2<f64>,
    positive: &[bool],
    kernel: Kernel,
    c: f64,
    sample_weight: &[f64],
) -> Result<BinarySvmFit, LearnError> {
    fit_svm_with_tolerance(x, positive, kernel, c, sample_weight, KKT_TOLERANCE)
}

/// [`fit_svm`] with an explicit stopping gap.
pub fn fit_svm_with_tolerance(
    x: ArrayView2<f64>,
    positive: &[bool],
    kernel: Kernel,
    c: f64,
    sample_weight: &[f64],
    tol: f64,
) -> Result<BinarySvmFit, LearnError> {
    check_c(c)?;
    if !(tol > 0.0) {
        return Err(LearnError::NonFinite);
    }
    kernel.check()?;
    let n = x.nrows();
    if n == 0 {
        return Err(LearnError::NoRows);
    }
    if positive.len() != n || sample_weight.len() != n {
        return Err(LearnError::ShapeMismatch {
            expected: n,
            got: positive.len().min(sample_weight.len()),
        });
    }
    if x.iter().chain(sample_weight).any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    if positive.iter().all(|&p| p) || positive.iter().all(|&p| !p) {
        return Err(LearnError::SingleClass);
    }
    let mean_w = sample_weight.iter().sum::<f64>() / n as f64;
    if !(mean_w > 0.0) {
        return Err(LearnError::NonFinite);
    }
    let signs: Vec<f64> = positive.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
    let upper: Vec<f64> = sample_weight.iter().map(|w| c * w / mean_w).collect();
    let k = gram(x, kernel);
    let index: Vec<usize> = (0..n).collect();
    let dual = solve_dual(&k, &index, &signs, &vec![-1.0; n], &upper, tol);
    let coef: Vec<f64> = dual.alpha.iter().zip(&signs).map(|(a, y)| a * y).collect();
    let model = SvmModel::from_expansion(x, kernel, c, coef, -dual.rho);
    Ok(BinarySvmFit {
        model,
        dual,
        signs,
        upper,
    })
}

/// ε-insensitive support vector regression.
pub fn fit_svr(x: ArrayView2<f64>, target: &[f64], kernel: Kernel, c: f64) -> Result<SvmModel, LearnError> {
    check_c(c)?;
    kernel.check()?;
    let n = x.nrows();
    if n == 0 {
        return Err(LearnError::NoRows);
    }
    if target.len() != n {
        return Err(LearnError::ShapeMismatch {
            expected: n,
            got: target.len(),
        });
    }
    if x.iter().chain(target).any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    let k = gram(x, kernel);
    let index: Vec<usize> = (0..2 * n).map(|i| i % n).collect();
    let y: Vec<f64> = (0..2 * n).map(|i| if i < n { 1.0 } else { -1.0 }).collect();
    let p: Vec<f64> = (0..2 * n)
        .map(|i| if i < n { SVR_EPSILON - target[i] } else { SVR_EPSILON + target[i - n] })
        .collect();
    let dual = solve_dual(&k, &index, &y, &p, &vec![c; 2 * n], KKT_TOLERANCE);
    let coef: Vec<f64> = (0..n).map(|i| dual.alpha[i] - dual.alpha[i + n]).collect();
    Ok(SvmModel::from_expansion(x, kernel, c, coef, -dual.rho))
}
