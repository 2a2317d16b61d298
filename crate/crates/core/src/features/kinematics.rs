use super::stats::{differentiate, differentiate_planar, effective_window, smooth};
use super::FeatureError;
use crate::stroke::Stroke;

/// Per-sample derived series of one derivative-eligible stroke.
///
/// Positions, pressure, tilt and the timestamps themselves are smoothed with
/// the same truncated moving average before differentiation. Smoothing the
/// time axis alongside the signal keeps straight-line motion at constant
/// velocity exact up to the stroke ends. Positions and times are taken
/// relative to the stroke's first sample, so shifting a drawing in space or
/// time does not perturb any derived value.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    /// Smoothed stroke-relative time, seconds.
    pub t: Vec<f64>,
    /// mm/s
    pub speed: Vec<f64>,
    /// mm/s²
    pub acceleration: Vec<f64>,
    /// mm/s³
    pub jerk: Vec<f64>,
    pub pressure: Vec<f64>,
    /// 1/s
    pub pressure_rate: Vec<f64>,
    /// degrees
    pub tilt_x: Vec<f64>,
    pub tilt_y: Vec<f64>,
    /// deg/s
    pub tilt_x_rate: Vec<f64>,
    pub tilt_y_rate: Vec<f64>,
}

pub fn kinematic_series(stroke: &Stroke, window: usize) -> Result<KinematicSeries, FeatureError> {
    let s = stroke.samples();
    if s.len() < 3 {
        return Err(FeatureError::TooShort(s.len()));
    }
    if window % 2 == 0 {
        return Err(FeatureError::EvenWindow(window));
    }
    let w = effective_window(window, s.len());
    let origin = s[0];
    let column = |f: &dyn Fn(&crate::stroke::PenSample) -> f64| -> Result<Vec<f64>, FeatureError> {
        smooth(&s.iter().map(f).collect::<Vec<_>>(), w)
    };

    let t = column(&|p| (p.t - origin.t) / 1000.0)?;
    let x = column(&|p| p.x - origin.x)?;
    let y = column(&|p| p.y - origin.y)?;
    let pressure = column(&|p| p.pressure)?;
    let tilt_x = column(&|p| p.tilt_x)?;
    let tilt_y = column(&|p| p.tilt_y)?;

    let (vx, vy) = differentiate_planar(&x, &y, &t)?;
    let (ax, ay) = differentiate_planar(&vx, &vy, &t)?;
    let (jx, jy) = differentiate_planar(&ax, &ay, &t)?;
    let magnitude = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u.hypot(*v)).collect::<Vec<_>>();

    Ok(KinematicSeries {
        speed: magnitude(&vx, &vy),
        acceleration: magnitude(&ax, &ay),
        jerk: magnitude(&jx, &jy),
        pressure_rate: differentiate(&pressure, &t)?,
        tilt_x_rate: differentiate(&tilt_x, &t)?,
        tilt_y_rate: differentiate(&tilt_y, &t)?,
        t,
        pressure,
        tilt_x,
        tilt_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke::PenSample;

    fn stroke(points: &[(f64, f64, f64)]) -> Stroke {
        Stroke::new(
            points
                .iter()
                .map(|&(t, x, y)| PenSample {
                    t,
                    x,
                    y,
                    pressure: 0.5,
                    tilt_x: 20.0,
                    tilt_y: 20.0,
                    pen_down: true,
                })
                .collect(),
        )
    }

    #[test]
    fn uniform_line_has_constant_speed() {
        // 3-4-5 direction, 10 ms steps, 0.5 mm per step → 50 mm/s
        let pts: Vec<_> = (0..12)
            .map(|i| (i as f64 * 10.0, 0.3 * i as f64, 0.4 * i as f64))
            .collect();
        let k = kinematic_series(&stroke(&pts), 5).unwrap();
        for v in &k.speed {
            assert!((v - 50.0).abs() < 1e-9, "{v}");
        }
        assert!(k.acceleration.iter().all(|a| a.abs() < 1e-6));
        assert!(k.jerk.iter().all(|j| j.abs() < 1e-3));
        assert!(k.pressure_rate.iter().all(|r| *r == 0.0));
    }

    #[test]
    fn stationary_pen() {
        let pts: Vec<_> = (0..6).map(|i| (i as f64 * 7.0, 3.0, 4.0)).collect();
        let k = kinematic_series(&stroke(&pts), 5).unwrap();
        assert!(k.speed.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn short_stroke_rejected() {
        let s = stroke(&[(0.0, 0.0, 0.0), (5.0, 1.0, 1.0)]);
        assert_eq!(kinematic_series(&s, 5), Err(FeatureError::TooShort(2)));
    }

    #[test]
    fn quadratic_path_matches_hand_differences() {
        // window 1: no smoothing, plain differences on x = t², y = 0
        let pts: Vec<_> = [0.0, 100.0, 200.0, 300.0, 400.0]
            .iter()
            .map(|&t: &f64| (t, (t / 1000.0).powi(2) * 1000.0, 0.0))
            .collect();
        let k = kinematic_series(&stroke(&pts), 1).unwrap();
        // x in mm: 0, 10, 40, 90, 160 at 0.1 s spacing
        let expected_v = [100.0, 200.0, 400.0, 600.0, 700.0];
        for (a, b) in k.speed.iter().zip(expected_v) {
            assert!((a - b).abs() < 1e-9 * b);
        }
        let expected_a = [1000.0, 1500.0, 2000.0, 1500.0, 1000.0];
        for (a, b) in k.acceleration.iter().zip(expected_a) {
            assert!((a - b).abs() < 1e-9 * b);
        }
    }
}
