//! The 38 per-task features written out one formula at a time.

use crate::recordings::RawSample;

pub const NAMES: [&str; 38] = [
    "speed_median",
    "speed_cv_across",
    "speed_cv_within",
    "speed_extrema_per_length",
    "speed_extrema_per_time",
    "accel_median",
    "accel_cv_across",
    "accel_cv_within",
    "accel_extrema_per_length",
    "accel_extrema_per_time",
    "jerk_median",
    "jerk_cv_across",
    "jerk_cv_within",
    "jerk_extrema_per_length",
    "jerk_extrema_per_time",
    "pressure_median",
    "pressure_cv_across",
    "pressure_cv_within",
    "pressure_extrema_per_length",
    "pressure_extrema_per_time",
    "pressure_rate_median",
    "pressure_rate_cv_across",
    "pressure_rate_cv_within",
    "tilt_x_sd_across",
    "tilt_x_sd_within",
    "tilt_x_rate_abs_median",
    "tilt_x_rate_cv_across",
    "tilt_x_rate_cv_within",
    "tilt_y_sd_across",
    "tilt_y_sd_within",
    "tilt_y_rate_abs_median",
    "tilt_y_rate_cv_across",
    "tilt_y_rate_cv_within",
    "pause_mean",
    "pause_cv",
    "n_drawings",
    "pause_drawing_ratio",
    "adjusted_total_duration",
];

/// Power of the spatial scale factor each feature picks up when every
/// position is multiplied by `c`.
pub fn scale_exponent(name: &str) -> i32 {
    match name {
        "speed_median" | "accel_median" | "jerk_median" => 1,
        "adjusted_total_duration" => -1,
        n if n.ends_with("_extrema_per_length") => -1,
        _ => 0,
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    Some(s / v.len() as f64)
}

fn sd(v: &[f64]) -> Option<f64> {
    if v.len() < 2 {
        return None;
    }
    let m = mean(v)?;
    let mut ss = 0.0;
    for x in v {
        ss += (x - m) * (x - m);
    }
    Some((ss / (v.len() - 1) as f64).sqrt())
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    Some(if n % 2 == 0 { 0.5 * (s[n / 2 - 1] + s[n / 2]) } else { s[n / 2] })
}

fn cv(v: &[f64]) -> Option<f64> {
    let m = mean(v)?;
    let s = sd(v)?;
    let biggest = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if m.abs() <= 1e-12 * biggest {
        None
    } else {
        Some(s / m)
    }
}

fn across(per: &[Vec<f64>]) -> Option<f64> {
    let mut means = Vec::new();
    for s in per {
        means.push(mean(s)?);
    }
    cv(&means)
}

fn within(per: &[Vec<f64>]) -> Option<f64> {
    let cvs: Vec<f64> = per.iter().filter_map(|s| cv(s)).collect();
    mean(&cvs)
}

fn pooled(per: &[Vec<f64>]) -> Option<f64> {
    median(&per.concat())
}

/// Interior extrema, a flat run counting once when the values on both of
/// its sides are lower or both higher.
pub fn extrema(v: &[f64]) -> usize {
    let mut count = 0;
    let mut i = 1;
    while i + 1 < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        if j + 1 < v.len() && v[i] != v[i - 1] {
            let before = v[i - 1];
            let after = v[j + 1];
            if (v[i] > before && v[i] > after) || (v[i] < before && v[i] < after) {
                count += 1;
            }
        }
        i = j + 1;
    }
    count
}

/// Centered mean over the window clipped to the series.
fn smooth(v: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let mut out = vec![0.0; v.len()];
    for i in 0..v.len() {
        let lo = i.saturating_sub(half);
        let hi = usize::min(i + half, v.len() - 1);
        let mut s = 0.0;
        for x in &v[lo..=hi] {
            s += x;
        }
        out[i] = s / (hi - lo + 1) as f64;
    }
    out
}

fn deriv(v: &[f64], t: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    d[0] = (v[1] - v[0]) / (t[1] - t[0]);
    d[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    d
}

struct Series {
    speed: Vec<f64>,
    accel: Vec<f64>,
    jerk: Vec<f64>,
    p: Vec<f64>,
    p_rate: Vec<f64>,
    tilt: [Vec<f64>; 2],
    tilt_rate_abs: [Vec<f64>; 2],
}

fn series(stroke: &[RawSample], window: usize) -> Series {
    let n = stroke.len();
    // the window never exceeds the largest odd length that fits
    let largest_odd = if n % 2 == 1 { n } else { n - 1 };
    let w = window.min(largest_odd).max(1);
    let first = stroke[0];
    let col = |f: &dyn Fn(&RawSample) -> f64| smooth(&stroke.iter().map(f).collect::<Vec<_>>(), w);
    let t = col(&|s| (s.t - first.t) / 1000.0);
    let x = col(&|s| s.x - first.x);
    let y = col(&|s| s.y - first.y);
    let (vx, vy) = (deriv(&x, &t), deriv(&y, &t));
    let (ax, ay) = (deriv(&vx, &t), deriv(&vy, &t));
    let (jx, jy) = (deriv(&ax, &t), deriv(&ay, &t));
    let norm = |a: &[f64], b: &[f64]| (0..n).map(|i| (a[i] * a[i] + b[i] * b[i]).sqrt()).collect::<Vec<_>>();
    let p = col(&|s| s.p);
    let tilt = [col(&|s| s.tx), col(&|s| s.ty)];
    let tilt_rate_abs = [
        deriv(&tilt[0], &t).iter().map(|r| r.abs()).collect(),
        deriv(&tilt[1], &t).iter().map(|r| r.abs()).collect(),
    ];
    Series {
        speed: norm(&vx, &vy),
        accel: norm(&ax, &ay),
        jerk: norm(&jx, &jy),
        p_rate: deriv(&p, &t),
        p,
        tilt,
        tilt_rate_abs,
    }
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    if b > 0.0 {
        Some(a / b)
    } else {
        None
    }
}

/// Reference values for one task recording, in registry order.
pub fn task_features(samples: &[RawSample], window: usize) -> Vec<Option<f64>> {
    let mut strokes: Vec<Vec<RawSample>> = Vec::new();
    let mut in_stroke = false;
    for s in samples {
        if s.down {
            if !in_stroke {
                strokes.push(Vec::new());
                in_stroke = true;
            }
            strokes.last_mut().unwrap().push(*s);
        } else {
            in_stroke = false;
        }
    }
    if strokes.is_empty() {
        return vec![None; 38];
    }

    let mut path = 0.0;
    let mut drawing = 0.0;
    for s in &strokes {
        for k in 1..s.len() {
            let (dx, dy) = (s[k].x - s[k - 1].x, s[k].y - s[k - 1].y);
            path += dx.hypot(dy);
        }
        drawing += (s[s.len() - 1].t - s[0].t) / 1000.0;
    }
    let pauses: Vec<f64> = (1..strokes.len())
        .map(|k| (strokes[k][0].t - strokes[k - 1].last().unwrap().t) / 1000.0)
        .collect();

    let eligible: Vec<Series> = strokes.iter().filter(|s| s.len() >= 3).map(|s| series(s, window)).collect();
    let pick = |f: &dyn Fn(&Series) -> Vec<f64>| eligible.iter().map(f).collect::<Vec<Vec<f64>>>();

    let mut out = Vec::with_capacity(38);
    let five = |per: Vec<Vec<f64>>, out: &mut Vec<Option<f64>>| {
        if per.is_empty() {
            out.extend([None; 5]);
            return;
        }
        let ext: usize = per.iter().map(|s| extrema(s)).sum();
        out.push(pooled(&per));
        out.push(across(&per));
        out.push(within(&per));
        out.push(ratio(ext as f64, path));
        out.push(ratio(ext as f64, drawing));
    };
    five(pick(&|s| s.speed.clone()), &mut out);
    five(pick(&|s| s.accel.clone()), &mut out);
    five(pick(&|s| s.jerk.clone()), &mut out);
    five(pick(&|s| s.p.clone()), &mut out);
    let rate = pick(&|s| s.p_rate.clone());
    out.push(pooled(&rate));
    out.push(across(&rate));
    out.push(within(&rate));

    for axis in 0..2 {
        if eligible.is_empty() {
            out.extend([None; 5]);
            continue;
        }
        let tilt = pick(&|s| s.tilt[axis].clone());
        let means: Vec<f64> = tilt.iter().map(|s| mean(s).unwrap()).collect();
        let sds: Vec<f64> = tilt.iter().map(|s| sd(s).unwrap()).collect();
        let r = pick(&|s| s.tilt_rate_abs[axis].clone());
        out.push(sd(&means));
        out.push(mean(&sds));
        out.push(pooled(&r));
        out.push(across(&r));
        out.push(within(&r));
    }

    let total_pause: f64 = pauses.iter().sum();
    let (pm, pcv) = match pauses.len() {
        0 => (Some(0.0), Some(0.0)),
        1 => (Some(pauses[0]), Some(0.0)),
        _ => (mean(&pauses), cv(&pauses)),
    };
    out.push(pm);
    out.push(pcv);
    out.push(Some(strokes.len() as f64));
    out.push(ratio(total_pause, drawing));
    out.push(ratio(total_pause + drawing, path));
    assert_eq!(out.len(), 38);
    out
}
