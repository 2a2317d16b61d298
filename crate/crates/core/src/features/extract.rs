use super::kinematics::{kinematic_series, KinematicSeries};
use super::stats::{
    count_local_extrema, cv, cv_across_strokes, cv_within_strokes, mean, pooled_median, sample_sd,
};
use super::{FeatureConfig, SessionFeatureVector, TaskFeatures, FEATURES_PER_TASK, SESSION_FEATURES};
use crate::stroke::{DrawingSession, Pause, Stroke, Task, TaskRecording};

/// Totals over every stroke of a task, eligible or not.
#[derive(Debug, Clone, Copy)]
struct Totals {
    path_length: f64,
    duration: f64,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// median, cv_across, cv_within, extrema per mm, extrema per second
fn series_block(per_stroke: &[&[f64]], totals: Totals) -> [Option<f64>; 5] {
    if per_stroke.is_empty() {
        return [None; 5];
    }
    let extrema: usize = per_stroke.iter().map(|s| count_local_extrema(s)).sum();
    [
        pooled_median(per_stroke),
        cv_across_strokes(per_stroke),
        cv_within_strokes(per_stroke),
        ratio(extrema as f64, totals.path_length),
        ratio(extrema as f64, totals.duration),
    ]
}

/// median, cv_across, cv_within
fn rate_block(per_stroke: &[&[f64]]) -> [Option<f64>; 3] {
    [
        pooled_median(per_stroke),
        cv_across_strokes(per_stroke),
        cv_within_strokes(per_stroke),
    ]
}

/// Ten pen-posture features: for tilt-x then tilt-y, the SD across strokes
/// (of per-stroke mean tilt), the mean within-stroke SD, and the absolute
/// median, across-CV and within-CV of the absolute tilt rate.
pub fn posture_features(series: &[KinematicSeries]) -> [Option<f64>; 10] {
    let mut out = [None; 10];
    if series.is_empty() {
        return out;
    }
    type Pick = fn(&KinematicSeries) -> (&[f64], &[f64]);
    let axes: [Pick; 2] = [
        |k| (&k.tilt_x, &k.tilt_x_rate),
        |k| (&k.tilt_y, &k.tilt_y_rate),
    ];
    for (a, pick) in axes.iter().enumerate() {
        let tilt: Vec<&[f64]> = series.iter().map(|k| pick(k).0).collect();
        let rate_abs: Vec<Vec<f64>> = series
            .iter()
            .map(|k| pick(k).1.iter().map(|r| r.abs()).collect())
            .collect();
        let means: Option<Vec<f64>> = tilt.iter().map(|s| mean(s)).collect();
        let sds: Vec<f64> = tilt.iter().filter_map(|s| sample_sd(s)).collect();
        let rates: Vec<&[f64]> = rate_abs.iter().map(Vec::as_slice).collect();
        let [median, across, within] = rate_block(&rates);
        out[a * 5..a * 5 + 5].copy_from_slice(&[
            means.and_then(|m| sample_sd(&m)),
            mean(&sds),
            median,
            across,
            within,
        ]);
    }
    out
}

/// Five pause features: mean and CV of pause duration, stroke count,
/// pause-to-drawing time ratio, and total (pause + drawing) time per mm.
pub fn pause_features(strokes: &[Stroke], pauses: &[Pause], path_length_total: f64) -> [Option<f64>; 5] {
    if strokes.is_empty() {
        return [None; 5];
    }
    let durations: Vec<f64> = pauses.iter().map(|p| p.duration).collect();
    let pause_total: f64 = durations.iter().sum();
    let drawing_total: f64 = strokes.iter().map(Stroke::duration).sum();
    let (pause_mean, pause_cv) = match durations.len() {
        0 => (Some(0.0), Some(0.0)),
        1 => (Some(durations[0]), Some(0.0)),
        _ => (mean(&durations), cv(&durations)),
    };
    [
        pause_mean,
        pause_cv,
        Some(strokes.len() as f64),
        ratio(pause_total, drawing_total),
        ratio(pause_total + drawing_total, path_length_total),
    ]
}

/// Computes the 38 features of one recording. Inputs that cannot support a
/// feature leave it missing.
pub fn extract_task_features(recording: &TaskRecording, config: &FeatureConfig) -> TaskFeatures {
    let strokes = recording.strokes();
    let mut values = [None; FEATURES_PER_TASK];
    if strokes.is_empty() {
        return TaskFeatures { values };
    }
    let totals = Totals {
        path_length: strokes.iter().map(Stroke::path_length).sum(),
        duration: strokes.iter().map(Stroke::duration).sum(),
    };
    let series: Vec<KinematicSeries> = strokes
        .iter()
        .filter(|s| s.is_derivative_eligible())
        .map(|s| kinematic_series(s, config.smoothing_window))
        .collect::<Result<_, _>>()
        .expect("eligible strokes and a validated window always differentiate");

    let column = |f: fn(&KinematicSeries) -> &[f64]| series.iter().map(f).collect::<Vec<&[f64]>>();

    let mut at = 0;
    let mut put = |block: &[Option<f64>]| {
        values[at..at + block.len()].copy_from_slice(block);
        at += block.len();
    };
    put(&series_block(&column(|k| &k.speed), totals));
    put(&series_block(&column(|k| &k.acceleration), totals));
    put(&series_block(&column(|k| &k.jerk), totals));
    put(&series_block(&column(|k| &k.pressure), totals));
    put(&rate_block(&column(|k| &k.pressure_rate)));
    put(&posture_features(&series));
    put(&pause_features(strokes, recording.pauses(), totals.path_length));
    debug_assert_eq!(at, FEATURES_PER_TASK);

    TaskFeatures { values }
}

/// Assembles the 190-wide vector; absent tasks contribute fully missing blocks.
pub fn extract_session_features(session: &DrawingSession, config: &FeatureConfig) -> SessionFeatureVector {
    let mut values = Vec::with_capacity(SESSION_FEATURES);
    for task in Task::ALL {
        let block = session
            .recording(task)
            .map(|r| extract_task_features(r, config))
            .unwrap_or_else(TaskFeatures::missing);
        values.extend_from_slice(block.values());
    }
    SessionFeatureVector::from_values(session.session_id(), values).expect("190 values")
}
