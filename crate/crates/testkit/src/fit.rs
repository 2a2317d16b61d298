//! Optimality checks and small closed-form or Newton fits for the
//! elastic-net objective
//!
//! ```text
//! J(w, b) = (1/S) Σ s_i ℓ(y_i, b + w·x_i) + λ₁‖w‖₁ + ½λ₂‖w‖₂²
//! λ₁ = α / (C·N),  λ₂ = (1 − α) / (C·N)
//! ```
//!
//! with logistic or half-squared loss.

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Weighted mean loss gradient with respect to (w, b).
fn loss_gradient(rows: &[Vec<f64>], y: &[f64], sw: &[f64], logistic: bool, w: &[f64], b: f64) -> (Vec<f64>, f64) {
    let total: f64 = sw.iter().sum();
    let mut g = vec![0.0; w.len()];
    let mut gb = 0.0;
    for ((row, &yi), &si) in rows.iter().zip(y).zip(sw) {
        let eta = b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>();
        let r = if logistic { sigmoid(eta) - yi } else { eta - yi };
        for (gj, xj) in g.iter_mut().zip(row) {
            *gj += si * r * xj / total;
        }
        gb += si * r / total;
    }
    (g, gb)
}

/// Largest violation of the subgradient optimality conditions.
#[allow(clippy::too_many_arguments)]
pub fn kkt_violation(rows: &[Vec<f64>], y: &[f64], sw: &[f64], logistic: bool, alpha: f64, c: f64, w: &[f64], b: f64) -> f64 {
    let n = rows.len() as f64;
    let (l1, l2) = (alpha / (c * n), (1.0 - alpha) / (c * n));
    let (g, gb) = loss_gradient(rows, y, sw, logistic, w, b);
    let mut worst = gb.abs();
    for (gj, wj) in g.iter().zip(w) {
        let v = if *wj == 0.0 {
            (gj.abs() - l1).max(0.0)
        } else {
            (gj + l2 * wj + l1 * wj.signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// Ridge logistic regression on one feature by Newton's method.
pub fn newton_logistic_1d(x: &[f64], y: &[f64], sw: &[f64], c: f64) -> (f64, f64) {
    let total: f64 = sw.iter().sum();
    let l2 = 1.0 / (c * x.len() as f64);
    let (mut w, mut b) = (0.0, 0.0);
    for _ in 0..200 {
        let (mut gw, mut gb, mut hww, mut hwb, mut hbb) = (l2 * w, 0.0, l2, 0.0, 0.0);
        for i in 0..x.len() {
            let p = sigmoid(b + w * x[i]);
            let s = sw[i] / total;
            gw += s * (p - y[i]) * x[i];
            gb += s * (p - y[i]);
            let h = s * p * (1.0 - p);
            hww += h * x[i] * x[i];
            hwb += h * x[i];
            hbb += h;
        }
        let det = hww * hbb - hwb * hwb;
        let dw = (hbb * gw - hwb * gb) / det;
        let db = (hww * gb - hwb * gw) / det;
        w -= dw;
        b -= db;
        if dw.abs().max(db.abs()) < 1e-15 {
            break;
        }
    }
    (w, b)
}

/// Closed-form weighted ridge line.
pub fn ridge_1d(x: &[f64], y: &[f64], sw: &[f64], c: f64) -> (f64, f64) {
    let total: f64 = sw.iter().sum();
    let l2 = 1.0 / (c * x.len() as f64);
    let xm = x.iter().zip(sw).map(|(x, s)| x * s).sum::<f64>() / total;
    let ym = y.iter().zip(sw).map(|(y, s)| y * s).sum::<f64>() / total;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..x.len() {
        sxy += sw[i] * (x[i] - xm) * (y[i] - ym) / total;
        sxx += sw[i] * (x[i] - xm) * (x[i] - xm) / total;
    }
    let w = sxy / (sxx + l2);
    (w, ym - w * xm)
}

/// Σ max(0, 1 − y f).
pub fn hinge_loss(decision: &[f64], signs: &[f64]) -> f64 {
    decision.iter().zip(signs).map(|(f, y)| (1.0 - y * f).max(0.0)).sum()
}
