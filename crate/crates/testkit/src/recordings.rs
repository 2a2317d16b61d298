use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One pen report: milliseconds, millimetres, unit pressure, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub tx: f64,
    pub ty: f64,
    pub down: bool,
}

/// A messy single-task recording: a few strokes of random length (some too
/// short for derivatives), hover reports in the gaps, stationary stretches
/// and held pressure so plateaus occur.
pub fn random_recording(seed: u64) -> Vec<RawSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut t = rng.random_range(0.0..50.0);
    let (mut x, mut y) = (rng.random_range(10.0..190.0), rng.random_range(10.0..130.0));
    let (mut tx, mut ty) = (rng.random_range(-40.0..40.0), rng.random_range(-40.0..40.0));
    let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let strokes = rng.random_range(1..=5);
    for s in 0..strokes {
        if s > 0 {
            for _ in 0..rng.random_range(0..3) {
                t += rng.random_range(5.0..120.0);
                x += rng.random_range(-3.0..3.0);
                y += rng.random_range(-3.0..3.0);
                out.push(RawSample { t, x, y, p: 0.0, tx, ty, down: false });
            }
            t += rng.random_range(5.0..300.0);
        }
        let n = if rng.random_bool(0.15) { rng.random_range(1..3) } else { rng.random_range(3..40) };
        let mut p: f64 = rng.random_range(0.2..0.8);
        for _ in 0..n {
            if !rng.random_bool(0.1) {
                heading += rng.random_range(-0.6..0.6);
                let step = rng.random_range(0.0..1.5);
                x += step * heading.cos();
                y += step * heading.sin();
            }
            if !rng.random_bool(0.3) {
                p = (p + rng.random_range(-0.08..0.08)).clamp(0.01, 1.0);
            }
            tx = (tx + rng.random_range(-2.0..2.0)).clamp(-85.0, 85.0);
            ty = (ty + rng.random_range(-2.0..2.0)).clamp(-85.0, 85.0);
            out.push(RawSample { t, x, y, p, tx, ty, down: true });
            t += rng.random_range(2.0..15.0);
        }
    }
    out
}
