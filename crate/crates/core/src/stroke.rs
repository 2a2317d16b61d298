//! Raw digitizer data model: samples, strokes, pauses, task recordings and
//! sessions, plus the JSON session file format.
//!
//! Files carry positions in millimetres and timestamps in milliseconds from
//! task start. Everything derived from them (stroke durations, pauses) is in
//! seconds.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while decoding or validating a session file.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("range violation: {0}")]
    RangeViolation(String),
    #[error("non-monotonic time in task {task}: sample {index} has t = {t} ms after {prev} ms")]
    NonMonotonicTime {
        task: Task,
        index: usize,
        prev: f64,
        t: f64,
    },
    #[error("duplicate recording for task {0}")]
    DuplicateTask(Task),
    #[error("session contains no recordings")]
    EmptySession,
}

impl ParseError {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::MalformedInput(_) => "MalformedInput",
            ParseError::RangeViolation(_) => "RangeViolation",
            ParseError::NonMonotonicTime { .. } => "NonMonotonicTime",
            ParseError::DuplicateTask(_) => "DuplicateTask",
            ParseError::EmptySession => "EmptySession",
        }
    }
}

/// The five drawing tasks, in canonical session order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "SENTENCE")]
    Sentence,
    #[serde(rename = "PENTAGON")]
    Pentagon,
    #[serde(rename = "TMT_A")]
    TmtA,
    #[serde(rename = "TMT_B")]
    TmtB,
    #[serde(rename = "CDT")]
    Cdt,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Sentence, Task::Pentagon, Task::TmtA, Task::TmtB, Task::Cdt];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Sentence => "SENTENCE",
            Task::Pentagon => "PENTAGON",
            Task::TmtA => "TMT_A",
            Task::TmtB => "TMT_B",
            Task::Cdt => "CDT",
        }
    }

    /// Position of the task in the canonical order.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Clinical diagnostic group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Diagnosis {
    #[serde(rename = "CN")]
    Cn,
    #[serde(rename = "MCI")]
    Mci,
    #[serde(rename = "DEMENTIA")]
    Dementia,
}

impl Diagnosis {
    pub const ALL: [Diagnosis; 3] = [Diagnosis::Cn, Diagnosis::Mci, Diagnosis::Dementia];

    pub fn as_str(self) -> &'static str {
        match self {
            Diagnosis::Cn => "CN",
            Diagnosis::Mci => "MCI",
            Diagnosis::Dementia => "DEMENTIA",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Diagnosis> {
        match s {
            "CN" => Some(Diagnosis::Cn),
            "MCI" => Some(Diagnosis::Mci),
            "DEMENTIA" => Some(Diagnosis::Dementia),
            _ => None,
        }
    }
}

/// One digitizer report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenSample {
    /// Milliseconds from task start.
    pub t: f64,
    /// Millimetres.
    pub x: f64,
    pub y: f64,
    /// Normalized force in `[0, 1]`.
    #[serde(rename = "p")]
    pub pressure: f64,
    /// Degrees in `[-90, 90]`.
    #[serde(rename = "tx")]
    pub tilt_x: f64,
    #[serde(rename = "ty")]
    pub tilt_y: f64,
    #[serde(rename = "d")]
    pub pen_down: bool,
}

impl PenSample {
    pub fn check(&self) -> Result<(), ParseError> {
        let finite = [self.t, self.x, self.y, self.pressure, self.tilt_x, self.tilt_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ParseError::RangeViolation("non-finite sample value".into()));
        }
        if self.t < 0.0 {
            return Err(ParseError::RangeViolation(format!("t = {} < 0", self.t)));
        }
        if !(0.0..=1.0).contains(&self.pressure) {
            return Err(ParseError::RangeViolation(format!(
                "pressure = {} outside [0, 1]",
                self.pressure
            )));
        }
        for (name, v) in [("tilt_x", self.tilt_x), ("tilt_y", self.tilt_y)] {
            if !(-90.0..=90.0).contains(&v) {
                return Err(ParseError::RangeViolation(format!("{name} = {v} outside [-90, 90]")));
            }
        }
        if !self.pen_down && self.pressure != 0.0 {
            return Err(ParseError::RangeViolation(format!(
                "pen-up sample at t = {} carries pressure {}",
                self.t, self.pressure
            )));
        }
        Ok(())
    }
}

/// A maximal run of pen-down samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    samples: Vec<PenSample>,
    path_length: f64,
    duration: f64,
}

/// Minimum sample count for a stroke to support the difference scheme.
pub const MIN_DERIVATIVE_SAMPLES: usize = 3;

impl Stroke {
    pub fn new(samples: Vec<PenSample>) -> Self {
        let path_length = samples
            .windows(2)
            .map(|w| (w[1].x - w[0].x).hypot(w[1].y - w[0].y))
            .sum();
        let duration = match (samples.first(), samples.last()) {
            (Some(a), Some(b)) => (b.t - a.t) / 1000.0,
            _ => 0.0,
        };
        Stroke {
            samples,
            path_length,
            duration,
        }
    }

    pub fn samples(&self) -> &[PenSample] {
        &self.samples
    }

    /// Millimetres.
    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    /// Seconds.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn is_derivative_eligible(&self) -> bool {
        self.samples.len() >= MIN_DERIVATIVE_SAMPLES
    }
}

/// Pen-up gap between consecutive strokes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pause {
    /// Seconds.
    pub duration: f64,
}

/// Splits a sample stream into strokes and the pauses between them.
///
/// Pen-up samples (hover reports) never enter a stroke; they only sit inside
/// the gaps. Timestamps must already be strictly increasing.
pub fn segment_strokes(samples: &[PenSample]) -> (Vec<Stroke>, Vec<Pause>) {
    let mut strokes = Vec::new();
    let mut current: Vec<PenSample> = Vec::new();
    for s in samples {
        if s.pen_down {
            current.push(*s);
        } else if !current.is_empty() {
            strokes.push(Stroke::new(std::mem::take(&mut current)));
        }
    }
    if !current.is_empty() {
        strokes.push(Stroke::new(current));
    }
    let pauses = strokes
        .windows(2)
        .map(|w| {
            let end = w[0].samples.last().expect("stroke is nonempty").t;
            let start = w[1].samples[0].t;
            Pause {
                duration: (start - end) / 1000.0,
            }
        })
        .collect();
    (strokes, pauses)
}

/// Samples of one task with their derived segmentation.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecording {
    task: Task,
    samples: Vec<PenSample>,
    strokes: Vec<Stroke>,
    pauses: Vec<Pause>,
}

impl TaskRecording {
    /// Validates every sample and the time ordering, then segments.
    pub fn new(task: Task, samples: Vec<PenSample>) -> Result<Self, ParseError> {
        for s in &samples {
            s.check()?;
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(ParseError::NonMonotonicTime {
                    task,
                    index: i + 1,
                    prev: w[0].t,
                    t: w[1].t,
                });
            }
        }
        let (strokes, pauses) = segment_strokes(&samples);
        Ok(TaskRecording {
            task,
            samples,
            strokes,
            pauses,
        })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn samples(&self) -> &[PenSample] {
        &self.samples
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn pauses(&self) -> &[Pause] {
        &self.pauses
    }
}

/// Labels attached to a session's subject.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SubjectRecord {
    #[serde(default)]
    pub diagnosis: Option<Diagnosis>,
    #[serde(default)]
    pub mmse: Option<i64>,
    #[serde(default)]
    pub mtl_atrophy_z: Option<f64>,
}

impl SubjectRecord {
    pub fn check(&self) -> Result<(), ParseError> {
        if let Some(m) = self.mmse {
            if !(0..=30).contains(&m) {
                return Err(ParseError::RangeViolation(format!("mmse = {m} outside [0, 30]")));
            }
        }
        if let Some(z) = self.mtl_atrophy_z {
            if !z.is_finite() {
                return Err(ParseError::RangeViolation("non-finite mtl_atrophy_z".into()));
            }
        }
        Ok(())
    }
}

/// Up to five task recordings from one sitting.
#[derive(Debug, Clone, PartialEq)]
pub struct DrawingSession {
    session_id: String,
    subject: Option<SubjectRecord>,
    recordings: BTreeMap<Task, TaskRecording>,
}

impl DrawingSession {
    pub fn new(
        session_id: impl Into<String>,
        subject: Option<SubjectRecord>,
        recordings: Vec<TaskRecording>,
    ) -> Result<Self, ParseError> {
        if recordings.is_empty() {
            return Err(ParseError::EmptySession);
        }
        if let Some(s) = &subject {
            s.check()?;
        }
        let mut map = BTreeMap::new();
        for r in recordings {
            let task = r.task;
            if map.insert(task, r).is_some() {
                return Err(ParseError::DuplicateTask(task));
            }
        }
        Ok(DrawingSession {
            session_id: session_id.into(),
            subject,
            recordings: map,
        })
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn subject(&self) -> Option<&SubjectRecord> {
        self.subject.as_ref()
    }

    pub fn recording(&self, task: Task) -> Option<&TaskRecording> {
        self.recordings.get(&task)
    }

    /// Recordings in canonical task order.
    pub fn recordings(&self) -> impl Iterator<Item = &TaskRecording> {
        self.recordings.values()
    }

    /// Encodes the session in the file format accepted by [`parse_session`].
    pub fn to_json(&self) -> String {
        let file = SessionFile {
            session_id: self.session_id.clone(),
            subject: self.subject,
            tasks: self
                .recordings
                .values()
                .map(|r| TaskFile {
                    task: r.task,
                    samples: r.samples.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("session serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct SessionFile {
    session_id: String,
    #[serde(default)]
    subject: Option<SubjectRecord>,
    tasks: Vec<TaskFile>,
}

#[derive(Serialize, Deserialize)]
struct TaskFile {
    task: Task,
    samples: Vec<PenSample>,
}

/// Decodes and validates a UTF-8 JSON session file.
pub fn parse_session(bytes: &[u8]) -> Result<DrawingSession, ParseError> {
    let file: SessionFile =
        serde_json::from_slice(bytes).map_err(|e| ParseError::MalformedInput(e.to_string()))?;
    let recordings = file
        .tasks
        .into_iter()
        .map(|t| TaskRecording::new(t.task, t.samples))
        .collect::<Result<Vec<_>, _>>()?;
    DrawingSession::new(file.session_id, file.subject, recordings)
}

/// Non-fatal findings about a parsed session.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub missing_tasks: Vec<Task>,
    pub zero_stroke_recordings: Vec<Task>,
    /// Per task, number of strokes with too few samples for derivatives.
    pub derivative_ineligible_strokes: Vec<(Task, usize)>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.missing_tasks.is_empty()
            && self.zero_stroke_recordings.is_empty()
            && self.derivative_ineligible_strokes.is_empty()
    }
}

pub fn validate_session(session: &DrawingSession) -> ValidationReport {
    let mut report = ValidationReport::default();
    for task in Task::ALL {
        let Some(rec) = session.recording(task) else {
            report.missing_tasks.push(task);
            continue;
        };
        if rec.strokes.is_empty() {
            report.zero_stroke_recordings.push(task);
        }
        let short = rec.strokes.iter().filter(|s| !s.is_derivative_eligible()).count();
        if short > 0 {
            report.derivative_ineligible_strokes.push((task, short));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn down(t: f64, x: f64) -> PenSample {
        PenSample {
            t,
            x,
            y: 0.0,
            pressure: 0.5,
            tilt_x: 10.0,
            tilt_y: -5.0,
            pen_down: true,
        }
    }

    fn up(t: f64) -> PenSample {
        PenSample {
            pressure: 0.0,
            pen_down: false,
            ..down(t, 0.0)
        }
    }

    fn sample_json(t: f64, p: f64, d: bool) -> String {
        format!(r#"{{"t":{t},"x":1,"y":2,"p":{p},"tx":0,"ty":0,"d":{d}}}"#)
    }

    #[test]
    fn minimal_tmt_a_file() {
        let samples: Vec<_> = [0.0, 10.0, 20.0].iter().map(|&t| sample_json(t, 0.4, true)).collect();
        let body = format!(
            r#"{{"session_id":"s1","subject":null,"tasks":[{{"task":"TMT_A","samples":[{}]}}]}}"#,
            samples.join(",")
        );
        let s = parse_session(body.as_bytes()).unwrap();
        let rec = s.recording(Task::TmtA).unwrap();
        assert_eq!(s.recordings().count(), 1);
        assert_eq!(rec.strokes().len(), 1);
        assert!(rec.pauses().is_empty());
    }

    #[test]
    fn pressure_out_of_range() {
        let body = format!(
            r#"{{"session_id":"s","tasks":[{{"task":"CDT","samples":[{}]}}]}}"#,
            sample_json(0.0, 1.5, true)
        );
        assert!(matches!(parse_session(body.as_bytes()), Err(ParseError::RangeViolation(_))));
    }

    #[test]
    fn equal_timestamps_rejected() {
        let samples: Vec<_> = [0.0, 10.0, 10.0].iter().map(|&t| sample_json(t, 0.4, true)).collect();
        let body = format!(
            r#"{{"session_id":"s","tasks":[{{"task":"CDT","samples":[{}]}}]}}"#,
            samples.join(",")
        );
        assert!(matches!(
            parse_session(body.as_bytes()),
            Err(ParseError::NonMonotonicTime { index: 2, .. })
        ));
    }

    #[test]
    fn empty_and_malformed() {
        assert_eq!(
            parse_session(br#"{"session_id":"s","tasks":[]}"#),
            Err(ParseError::EmptySession)
        );
        assert!(matches!(parse_session(b"not json"), Err(ParseError::MalformedInput(_))));
        let dup = format!(
            r#"{{"session_id":"s","tasks":[{{"task":"CDT","samples":[{0}]}},{{"task":"CDT","samples":[{0}]}}]}}"#,
            sample_json(0.0, 0.2, true)
        );
        assert_eq!(parse_session(dup.as_bytes()), Err(ParseError::DuplicateTask(Task::Cdt)));
    }

    #[test]
    fn unknown_fields_and_order_ignored() {
        let body = r#"{"tasks":[{"samples":[{"d":true,"ty":0,"tx":0,"p":0.1,"y":0,"x":0,"t":0,"extra":1}],"task":"SENTENCE","note":"x"}],"meta":{"a":1},"session_id":"z"}"#;
        let s = parse_session(body.as_bytes()).unwrap();
        assert_eq!(s.session_id(), "z");
    }

    #[test]
    fn pen_up_with_pressure_rejected() {
        let body = format!(
            r#"{{"session_id":"s","tasks":[{{"task":"CDT","samples":[{}]}}]}}"#,
            sample_json(0.0, 0.3, false)
        );
        assert!(matches!(parse_session(body.as_bytes()), Err(ParseError::RangeViolation(_))));
    }

    #[test]
    fn mmse_out_of_range() {
        let body = format!(
            r#"{{"session_id":"s","subject":{{"diagnosis":"CN","mmse":31,"mtl_atrophy_z":null}},"tasks":[{{"task":"CDT","samples":[{}]}}]}}"#,
            sample_json(0.0, 0.3, true)
        );
        assert!(matches!(parse_session(body.as_bytes()), Err(ParseError::RangeViolation(_))));
    }

    #[test]
    fn two_strokes_one_pause() {
        let mut samples: Vec<_> = (0..5).map(|i| down(i as f64 * 10.0, i as f64)).collect();
        samples.extend((0..11).map(|i| up(50.0 + i as f64 * 10.0)));
        samples.extend((0..5).map(|i| down(160.0 + i as f64 * 10.0, 10.0)));
        let (strokes, pauses) = segment_strokes(&samples);
        assert_eq!(strokes.len(), 2);
        assert_eq!(pauses.len(), 1);
        assert!((pauses[0].duration - 0.120).abs() < 1e-15);
        assert_eq!(strokes[0].path_length(), 4.0);
        assert!((strokes[0].duration() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn all_down_is_one_stroke() {
        let samples: Vec<_> = (0..7).map(|i| down(i as f64, 0.0)).collect();
        let (strokes, pauses) = segment_strokes(&samples);
        assert_eq!((strokes.len(), pauses.len()), (1, 0));
    }

    #[test]
    fn alternation_ddudd() {
        let samples = vec![down(0.0, 0.0), down(1.0, 0.0), up(2.0), down(3.0, 0.0), down(4.0, 0.0)];
        let (strokes, pauses) = segment_strokes(&samples);
        assert_eq!((strokes.len(), pauses.len()), (2, 1));
        assert!(!strokes[0].is_derivative_eligible());
    }

    fn recording(task: Task, n: usize) -> TaskRecording {
        TaskRecording::new(task, (0..n).map(|i| down(i as f64, i as f64)).collect()).unwrap()
    }

    #[test]
    fn validation_reports() {
        let full = DrawingSession::new("a", None, Task::ALL.iter().map(|&t| recording(t, 4)).collect()).unwrap();
        assert!(validate_session(&full).is_empty());

        let partial =
            DrawingSession::new("b", None, Task::ALL[..4].iter().map(|&t| recording(t, 4)).collect()).unwrap();
        assert_eq!(validate_session(&partial).missing_tasks, vec![Task::Cdt]);

        let short = DrawingSession::new("c", None, vec![recording(Task::TmtB, 2)]).unwrap();
        let report = validate_session(&short);
        assert_eq!(report.derivative_ineligible_strokes, vec![(Task::TmtB, 1)]);

        let hover_only = TaskRecording::new(Task::Cdt, vec![up(0.0), up(5.0)]).unwrap();
        let s = DrawingSession::new("d", None, vec![hover_only]).unwrap();
        assert_eq!(validate_session(&s).zero_stroke_recordings, vec![Task::Cdt]);
    }
}
