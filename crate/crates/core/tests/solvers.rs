use inkscreen_core::learners::glm::{GlmFlavor, Problem, SolverOptions};
use inkscreen_core::learners::svm::{fit_svm_with_tolerance, Kernel};
use inkscreen_testkit::fit::{hinge_loss, kkt_violation, newton_logistic_1d, ridge_1d};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Toy {
    x: Array2<f64>,
    y: Vec<f64>,
    sw: Vec<f64>,
}

fn toy(seed: u64, logistic: bool) -> Toy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(20..60);
    let p = rng.random_range(2..8);
    let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0));
    let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.5..1.5)).collect();
    let y = x
        .rows()
        .into_iter()
        .map(|r| {
            let eta: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + 0.3;
            if logistic {
                f64::from(u8::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())))
            } else {
                eta + rng.random_range(-0.5..0.5)
            }
        })
        .collect();
    let sw = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    Toy { x, y, sw }
}

fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

#[test]
fn elastic_net_subgradient_optimality() {
    let opts = SolverOptions::default();
    for seed in 0..20 {
        let logistic = seed % 2 == 0;
        let t = toy(seed, logistic);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let alpha = rng.random_range(0.05..1.0);
        let c = 10f64.powf(rng.random_range(-1.0..1.0));
        let flavor = if logistic { GlmFlavor::Logistic } else { GlmFlavor::Linear };
        let sol = Problem { flavor, x: t.x.view(), y: &t.y, sample_weight: &t.sw, alpha, c }.solve(opts).unwrap();
        assert!(sol.converged, "seed {seed}");
        let p = &sol.predictor;
        let v = kkt_violation(&rows(&t.x), &t.y, &t.sw, logistic, alpha, c, &p.weights, p.intercept);
        assert!(v <= 1e-4, "seed {seed}: violation {v}");
    }
}

#[test]
fn ridge_logistic_matches_newton() {
    for seed in 0..5 {
        let t = toy(50 + seed, true);
        let x1 = t.x.column(0).to_owned();
        let xm = x1.clone().insert_axis(ndarray::Axis(1));
        for c in [0.1, 1.0, 10.0] {
            let sol = Problem { flavor: GlmFlavor::Logistic, x: xm.view(), y: &t.y, sample_weight: &t.sw, alpha: 0.0, c }
                .solve(SolverOptions::default())
                .unwrap();
            let (w, b) = newton_logistic_1d(x1.as_slice().unwrap(), &t.y, &t.sw, c);
            assert!((sol.predictor.weights[0] - w).abs() < 1e-4, "c {c}: {} vs {w}", sol.predictor.weights[0]);
            assert!((sol.predictor.intercept - b).abs() < 1e-4, "c {c}: {} vs {b}", sol.predictor.intercept);
        }
    }
}

#[test]
fn ridge_line_matches_closed_form() {
    for seed in 0..5 {
        let t = toy(80 + seed, false);
        let x1 = t.x.column(1).to_owned();
        let xm = x1.clone().insert_axis(ndarray::Axis(1));
        for c in [0.05, 1.0, 20.0] {
            let sol = Problem { flavor: GlmFlavor::Linear, x: xm.view(), y: &t.y, sample_weight: &t.sw, alpha: 0.0, c }
                .solve(SolverOptions::default())
                .unwrap();
            let (w, b) = ridge_1d(x1.as_slice().unwrap(), &t.y, &t.sw, c);
            assert!((sol.predictor.weights[0] - w).abs() < 1e-4);
            assert!((sol.predictor.intercept - b).abs() < 1e-4);
        }
    }
}

fn separable(seed: u64) -> (Array2<f64>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(6..30);
    let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let normal = [angle.cos(), angle.sin()];
    let mut x = Array2::zeros((n, 2));
    let mut pos = Vec::with_capacity(n);
    for i in 0..n {
        let side = i % 2 == 0;
        let along = rng.random_range(-3.0..3.0);
        let off = rng.random_range(0.5..3.0) * if side { 1.0 } else { -1.0 };
        x[[i, 0]] = off * normal[0] - along * normal[1];
        x[[i, 1]] = off * normal[1] + along * normal[0];
        pos.push(side);
    }
    (x, pos)
}

#[test]
fn svm_is_dual_feasible_with_zero_hinge_on_separable_sets() {
    for seed in 0..20 {
        let (x, pos) = separable(seed);
        let kernel = if seed % 2 == 0 { Kernel::Linear } else { Kernel::Rbf { gamma: 0.5 } };
        let fit = fit_svm_with_tolerance(x.view(), &pos, kernel, 1000.0, &vec![1.0; pos.len()], 1e-9).unwrap();
        assert!(fit.dual.converged);
        let balance: f64 = fit.dual.alpha.iter().zip(&fit.signs).map(|(a, y)| a * y).sum();
        assert!(balance.abs() <= 1e-6, "seed {seed}: {balance}");
        for (a, u) in fit.dual.alpha.iter().zip(&fit.upper) {
            assert!(*a >= -1e-6 && *a <= u + 1e-6);
        }
        let f = fit.model.decision(x.view()).unwrap();
        let h = hinge_loss(&f, &fit.signs);
        assert!(h <= 1e-6, "seed {seed}: hinge {h}");
    }
}
