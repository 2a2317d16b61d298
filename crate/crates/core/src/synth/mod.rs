//! Seeded synthetic drawing sessions and labelled cohorts.
//!
//! A single impairment level θ ∈ [0, 1] drives every effect channel: pen
//! speed falls, speed variability, tremor and pausing rise, and pressure
//! weakens as θ grows. Labels follow a fixed noisy model of θ.

mod templates;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::derive_seed;
use crate::stroke::{Diagnosis, DrawingSession, PenSample, SubjectRecord, Task, TaskRecording};

pub use templates::{template, Polyline, TmtLayout, TmtTarget};

const TAG_LABELS: u64 = 1;
const TAG_THETA: u64 = 2;
const MCI_THRESHOLD: f64 = 0.33;
const DEMENTIA_THRESHOLD: f64 = 0.66;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthesis spec: {0}")]
    BadSpec(String),
}

/// A linear effect of θ: `at0` when θ = 0, `at1` when θ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub at0: f64,
    pub at1: f64,
}

impl Effect {
    const fn new(at0: f64, at1: f64) -> Self {
        Effect { at0, at1 }
    }

    pub fn at(&self, theta: f64) -> f64 {
        self.at0 + (self.at1 - self.at0) * theta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Effects {
    /// Typical pen speed, mm/s.
    pub speed_mm_s: Effect,
    /// Log-scale SD of the per-stroke speed.
    pub speed_sd: Effect,
    /// Relative amplitude of the within-stroke speed wobble.
    pub speed_wobble: Effect,
    /// Tremor extrema per mm of path.
    pub tremor_rate: Effect,
    pub tremor_amplitude_mm: Effect,
    /// Expected number of extra pen lifts per task.
    pub extra_lifts: Effect,
    /// Median pause, seconds (log-normal).
    pub pause_median_s: Effect,
    pub pause_log_sd: Effect,
    pub pressure_mean: Effect,
    pub pressure_cv: Effect,
    /// Tilt random-walk SD, degrees per √s.
    pub tilt_drift_sd: Effect,
}

impl Default for Effects {
    fn default() -> Self {
        Effects {
            speed_mm_s: Effect::new(60.0, 22.0),
            speed_sd: Effect::new(0.10, 0.35),
            speed_wobble: Effect::new(0.05, 0.35),
            tremor_rate: Effect::new(0.15, 0.8),
            tremor_amplitude_mm: Effect::new(0.03, 0.35),
            extra_lifts: Effect::new(0.3, 4.0),
            pause_median_s: Effect::new(0.3, 1.2),
            pause_log_sd: Effect::new(0.3, 0.6),
            pressure_mean: Effect::new(0.62, 0.45),
            pressure_cv: Effect::new(0.08, 0.25),
            tilt_drift_sd: Effect::new(1.5, 6.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CohortSpec {
    pub theta: f64,
    pub sampling_hz: f64,
    /// Log-scale SD of a per-subject speed factor unrelated to θ.
    pub subject_speed_sd: f64,
    pub effects: Effects,
    pub layout: TmtLayout,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            theta: 0.0,
            sampling_hz: 150.0,
            subject_speed_sd: 0.08,
            effects: Effects::default(),
            layout: TmtLayout::builtin().clone(),
        }
    }
}

impl CohortSpec {
    pub fn with_theta(theta: f64) -> Self {
        CohortSpec {
            theta,
            ..CohortSpec::default()
        }
    }

    pub fn check(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::BadSpec(m.to_string()));
        if !(0.0..=1.0).contains(&self.theta) {
            return bad("theta outside [0, 1]");
        }
        // at least one millisecond per sample keeps rounded timestamps increasing
        if !(self.sampling_hz > 0.0 && self.sampling_hz <= 1000.0) {
            return bad("sampling_hz outside (0, 1000]");
        }
        if !(self.subject_speed_sd >= 0.0 && self.subject_speed_sd.is_finite()) {
            return bad("subject_speed_sd must be finite and non-negative");
        }
        let e = &self.effects;
        let all = [
            e.speed_mm_s,
            e.speed_sd,
            e.speed_wobble,
            e.tremor_rate,
            e.tremor_amplitude_mm,
            e.extra_lifts,
            e.pause_median_s,
            e.pause_log_sd,
            e.pressure_mean,
            e.pressure_cv,
            e.tilt_drift_sd,
        ];
        if all.iter().any(|f| !(f.at0.is_finite() && f.at1.is_finite() && f.at0 >= 0.0 && f.at1 >= 0.0)) {
            return bad("effects must be finite and non-negative");
        }
        for (f, name) in [(e.speed_mm_s, "speed_mm_s"), (e.pause_median_s, "pause_median_s")] {
            if f.at0 == 0.0 || f.at1 == 0.0 {
                return Err(SynthError::BadSpec(format!("{name} must be positive")));
            }
        }
        if e.speed_wobble.at0 >= 1.0 || e.speed_wobble.at1 >= 1.0 {
            return bad("speed_wobble must be below 1");
        }
        if e.pressure_mean.at0 > 1.0 || e.pressure_mean.at1 > 1.0 {
            return bad("pressure_mean above 1");
        }
        if self.layout.tmt_a.len() < 2 || self.layout.tmt_b.len() < 2 {
            return bad("layouts need at least two targets");
        }
        Ok(())
    }
}

pub fn diagnosis_for(theta: f64) -> Diagnosis {
    if theta < MCI_THRESHOLD {
        Diagnosis::Cn
    } else if theta < DEMENTIA_THRESHOLD {
        Diagnosis::Mci
    } else {
        Diagnosis::Dementia
    }
}

/// Labels from the noisy θ model.
pub fn subject_for(theta: f64, seed: u64) -> SubjectRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let mmse = (29.0 - 10.0 * theta + z.sample(&mut rng)).round().clamp(0.0, 30.0) as i64;
    let mtl = 0.8 + 1.4 * theta + 0.3 * z.sample(&mut rng);
    SubjectRecord {
        diagnosis: Some(diagnosis_for(theta)),
        mmse: Some(mmse),
        mtl_atrophy_z: Some(mtl),
    }
}

fn q(v: f64, steps: f64) -> f64 {
    (v * steps).round() / steps
}

struct Pen<'a> {
    spec: &'a CohortSpec,
    rng: ChaCha8Rng,
    normal: Normal<f64>,
    tick: u64,
    tilt: [f64; 2],
    samples: Vec<PenSample>,
}

impl Pen<'_> {
    fn gauss(&mut self) -> f64 {
        self.normal.sample(&mut self.rng)
    }

    fn emit(&mut self, x: f64, y: f64, pressure: f64, down: bool) {
        let dt = 1.0 / self.spec.sampling_hz;
        let drift = self.spec.effects.tilt_drift_sd.at(self.spec.theta) * dt.sqrt();
        for k in 0..2 {
            let step = drift * self.gauss();
            self.tilt[k] = (self.tilt[k] + step).clamp(-89.0, 89.0);
        }
        self.samples.push(PenSample {
            t: (self.tick as f64 * 1000.0 / self.spec.sampling_hz).round(),
            x: q(x, 256.0),
            y: q(y, 256.0),
            pressure: if down { q(pressure, 1024.0).clamp(1.0 / 1024.0, 1.0) } else { 0.0 },
            tilt_x: q(self.tilt[0], 16.0),
            tilt_y: q(self.tilt[1], 16.0),
            pen_down: down,
        });
        self.tick += 1;
    }

    fn stroke(&mut self, path: &[[f64; 2]], subject_speed: f64) {
        let e = &self.spec.effects;
        let th = self.spec.theta;
        let seg: Vec<f64> = path.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).collect();
        let total: f64 = seg.iter().sum();
        let v = e.speed_mm_s.at(th) * subject_speed * (e.speed_sd.at(th) * self.gauss()).exp();
        let wobble = e.speed_wobble.at(th);
        let (rate, amp) = (e.tremor_rate.at(th), e.tremor_amplitude_mm.at(th));
        let base_p = (e.pressure_mean.at(th) * (e.pressure_cv.at(th) * self.gauss()).exp()).min(1.0);
        let p_cv = e.pressure_cv.at(th);
        let phases: [f64; 3] = std::array::from_fn(|_| self.rng.random_range(0.0..std::f64::consts::TAU));
        let dt = 1.0 / self.spec.sampling_hz;

        let mut s = 0.0_f64;
        loop {
            let at = s.min(total);
            let (mut j, mut start) = (0, 0.0);
            while j + 1 < seg.len() && start + seg[j] < at {
                start += seg[j];
                j += 1;
            }
            let frac = if seg[j] > 0.0 { (at - start) / seg[j] } else { 0.0 };
            let [a, b] = [path[j], path[j + 1]];
            let (dx, dy) = if seg[j] > 0.0 { ((b[0] - a[0]) / seg[j], (b[1] - a[1]) / seg[j]) } else { (0.0, 0.0) };
            let offset = amp * (std::f64::consts::PI * rate * at + phases[0]).sin();
            let x = a[0] + frac * (b[0] - a[0]) - dy * offset;
            let y = a[1] + frac * (b[1] - a[1]) + dx * offset;
            let u = if total > 0.0 { at / total } else { 1.0 };
            let ramp = (8.0 * u).min(8.0 * (1.0 - u)).clamp(0.0, 1.0);
            let pressure = base_p * (0.75 + 0.25 * ramp) * (1.0 + 0.5 * p_cv * (0.3 * at + phases[1]).sin());
            self.emit(x, y, pressure, true);
            if s >= total {
                break;
            }
            let speed = v
                * (0.45 + 0.55 * (std::f64::consts::PI * u).sin())
                * (1.0 + wobble * (std::f64::consts::TAU * 2.0 * u + phases[2]).sin());
            s += speed * dt;
        }
    }

    fn hover(&mut self, from: [f64; 2], to: [f64; 2]) {
        let e = &self.spec.effects;
        let th = self.spec.theta;
        let seconds = e.pause_median_s.at(th) * (e.pause_log_sd.at(th) * self.gauss()).exp();
        let ticks = ((seconds * self.spec.sampling_hz).round() as u64).max(2);
        for k in 1..ticks {
            let f = k as f64 / ticks as f64;
            self.emit(from[0] + f * (to[0] - from[0]), from[1] + f * (to[1] - from[1]), 0.0, false);
        }
    }
}

/// Splits paths at random interior points to model hesitation lifts.
fn add_lifts(paths: Vec<Polyline>, lifts: usize, rng: &mut ChaCha8Rng) -> Vec<Polyline> {
    let mut paths = paths;
    for _ in 0..lifts {
        let lengths: Vec<f64> = paths
            .iter()
            .map(|p| p.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum())
            .collect();
        let total: f64 = lengths.iter().sum();
        let mut pick = rng.random_range(0.0..total);
        let mut i = 0;
        while i + 1 < paths.len() && pick >= lengths[i] {
            pick -= lengths[i];
            i += 1;
        }
        let cut = lengths[i] * rng.random_range(0.2..0.8);
        let path = &paths[i];
        let (mut acc, mut j) = (0.0, 0);
        loop {
            let l = (path[j + 1][0] - path[j][0]).hypot(path[j + 1][1] - path[j][1]);
            if acc + l >= cut || j + 2 == path.len() {
                let f = if l > 0.0 { ((cut - acc) / l).clamp(0.0, 1.0) } else { 0.0 };
                let m = [path[j][0] + f * (path[j + 1][0] - path[j][0]), path[j][1] + f * (path[j + 1][1] - path[j][1])];
                let mut head: Polyline = path[..=j].to_vec();
                head.push(m);
                let mut tail: Polyline = vec![m];
                tail.extend_from_slice(&path[j + 1..]);
                paths.splice(i..=i, [head, tail]);
                break;
            }
            acc += l;
            j += 1;
        }
    }
    paths
}

fn draw_task(task: Task, spec: &CohortSpec, subject_speed: f64, seed: u64) -> Vec<PenSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lifts = {
        let mean = spec.effects.extra_lifts.at(spec.theta);
        if mean > 0.0 {
            Poisson::new(mean).expect("positive mean").sample(&mut rng) as usize
        } else {
            0
        }
    };
    let paths = add_lifts(template(task, &spec.layout), lifts, &mut rng);
    let start = rng.random_range(30..90);
    let tilt = [35.0 + rng.random_range(-4.0..4.0), 45.0 + rng.random_range(-4.0..4.0)];
    let mut pen = Pen {
        spec,
        rng,
        normal: Normal::new(0.0, 1.0).expect("unit normal"),
        tick: start,
        tilt,
        samples: Vec::new(),
    };
    for (i, path) in paths.iter().enumerate() {
        if i > 0 {
            let from = *paths[i - 1].last().expect("non-empty path");
            pen.hover(from, path[0]);
        }
        pen.stroke(path, subject_speed);
    }
    pen.samples
}

fn session_with_id(spec: &CohortSpec, seed: u64, id: String) -> Result<DrawingSession, SynthError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subject_speed = (spec.subject_speed_sd * Normal::new(0.0, 1.0).expect("unit normal").sample(&mut rng)).exp();
    let recordings = Task::ALL
        .into_iter()
        .map(|task| {
            let samples = draw_task(task, spec, subject_speed, derive_seed(seed, &[100 + task.index() as u64]));
            TaskRecording::new(task, samples).map_err(|e| SynthError::BadSpec(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let subject = subject_for(spec.theta, derive_seed(seed, &[TAG_LABELS]));
    DrawingSession::new(id, Some(subject), recordings).map_err(|e| SynthError::BadSpec(e.to_string()))
}

/// A full five-task session at `spec.theta`, with labels.
pub fn generate_session(spec: &CohortSpec, seed: u64) -> Result<DrawingSession, SynthError> {
    session_with_id(spec, seed, format!("synth-{seed:016x}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaBand {
    pub count: usize,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaDistribution {
    Fixed { theta: f64 },
    Uniform { low: f64, high: f64 },
    /// Exact counts drawn uniformly inside each band, bands in order.
    Bands { bands: Vec<ThetaBand> },
}

impl ThetaDistribution {
    /// Three well-separated bands, one inside each diagnostic range.
    pub fn separated_groups(cn: usize, mci: usize, dementia: usize) -> Self {
        ThetaDistribution::Bands {
            bands: vec![
                ThetaBand {
                    count: cn,
                    low: 0.0,
                    high: 0.2,
                },
                ThetaBand {
                    count: mci,
                    low: 0.42,
                    high: 0.58,
                },
                ThetaBand {
                    count: dementia,
                    low: 0.8,
                    high: 1.0,
                },
            ],
        }
    }

    fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>, SynthError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Result<f64, SynthError> {
            if !(in_unit(lo) && in_unit(hi) && lo <= hi) {
                return Err(SynthError::BadSpec(format!("bad theta band [{lo}, {hi}]")));
            }
            Ok(if lo == hi { lo } else { rng.random_range(lo..=hi) })
        };
        match self {
            ThetaDistribution::Fixed { theta } => {
                draw(&mut rng, *theta, *theta)?;
                Ok(vec![*theta; n])
            }
            ThetaDistribution::Uniform { low, high } => (0..n).map(|_| draw(&mut rng, *low, *high)).collect(),
            ThetaDistribution::Bands { bands } => {
                let total: usize = bands.iter().map(|b| b.count).sum();
                if total != n {
                    return Err(SynthError::BadSpec(format!("band counts sum to {total}, expected {n}")));
                }
                let mut out = Vec::with_capacity(n);
                for b in bands {
                    for _ in 0..b.count {
                        out.push(draw(&mut rng, b.low, b.high)?);
                    }
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cohort {
    pub sessions: Vec<DrawingSession>,
    pub thetas: Vec<f64>,
}

impl Cohort {
    pub fn subjects(&self) -> Vec<SubjectRecord> {
        self.sessions
            .iter()
            .map(|s| *s.subject().expect("synthetic sessions are labelled"))
            .collect()
    }
}

/// `n` labelled sessions; `base` supplies everything but θ.
pub fn generate_cohort(
    n: usize,
    thetas: &ThetaDistribution,
    base: &CohortSpec,
    seed: u64,
) -> Result<Cohort, SynthError> {
    if n == 0 {
        return Err(SynthError::BadSpec("cohort size must be at least 1".into()));
    }
    let thetas = thetas.sample(n, derive_seed(seed, &[TAG_THETA]))?;
    let sessions = thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let spec = CohortSpec { theta, ..base.clone() };
            session_with_id(&spec, derive_seed(seed, &[i as u64]), format!("synth-{:04}", i + 1))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Cohort { sessions, thetas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stroke::{parse_session, validate_session};

    #[test]
    fn same_seed_same_bytes() {
        let spec = CohortSpec::with_theta(0.4);
        let a = generate_session(&spec, 7).unwrap().to_json();
        let b = generate_session(&spec, 7).unwrap().to_json();
        assert_eq!(a, b);
        assert_ne!(a, generate_session(&spec, 8).unwrap().to_json());
    }

    #[test]
    fn round_trips_with_clean_report() {
        for theta in [0.0, 0.5, 1.0] {
            let s = generate_session(&CohortSpec::with_theta(theta), 3).unwrap();
            let back = parse_session(s.to_json().as_bytes()).unwrap();
            assert_eq!(back, s);
            assert!(validate_session(&back).is_empty(), "{:?}", validate_session(&back));
        }
    }

    #[test]
    fn bad_specs() {
        assert!(generate_session(&CohortSpec::with_theta(1.5), 1).is_err());
        let mut spec = CohortSpec::default();
        spec.sampling_hz = 0.0;
        assert!(generate_session(&spec, 1).is_err());
        let dist = ThetaDistribution::separated_groups(1, 1, 1);
        assert!(generate_cohort(4, &dist, &CohortSpec::default(), 1).is_err());
        assert!(generate_cohort(0, &ThetaDistribution::Fixed { theta: 0.0 }, &CohortSpec::default(), 1).is_err());
    }

    #[test]
    fn group_counts_and_label_ranges() {
        let c = generate_cohort(145, &ThetaDistribution::separated_groups(46, 67, 32), &CohortSpec::default(), 5).unwrap();
        let mut counts = [0; 3];
        for s in c.subjects() {
            counts[s.diagnosis.unwrap().index()] += 1;
            assert!((0..=30).contains(&s.mmse.unwrap()));
        }
        assert_eq!(counts, [46, 67, 32]);
    }

    #[test]
    fn all_zero_theta_is_all_cn() {
        let c = generate_cohort(12, &ThetaDistribution::Fixed { theta: 0.0 }, &CohortSpec::default(), 2).unwrap();
        assert!(c.subjects().iter().all(|s| s.diagnosis == Some(Diagnosis::Cn)));
    }

    #[test]
    fn mmse_clamped_at_extremes() {
        for seed in 0..200 {
            let m = subject_for(1.0, seed).mmse.unwrap();
            assert!((0..=30).contains(&m));
            let m = subject_for(0.0, seed).mmse.unwrap();
            assert!(m <= 30);
        }
    }
}
