use inkscreen_core::features::{extract_session_features, extract_task_features, FeatureConfig, TASK_FEATURE_NAMES};
use inkscreen_core::stroke::{PenSample, Task, TaskRecording};
use inkscreen_core::synth::{generate_session, CohortSpec};
use inkscreen_testkit::features::{task_features, NAMES};
use inkscreen_testkit::recordings::{random_recording, RawSample};
use inkscreen_testkit::rel_close;

fn to_core(raw: &[RawSample]) -> Vec<PenSample> {
    raw.iter()
        .map(|s| PenSample {
            t: s.t,
            x: s.x,
            y: s.y,
            pressure: s.p,
            tilt_x: s.tx,
            tilt_y: s.ty,
            pen_down: s.down,
        })
        .collect()
}

fn from_core(samples: &[PenSample]) -> Vec<RawSample> {
    samples
        .iter()
        .map(|s| RawSample {
            t: s.t,
            x: s.x,
            y: s.y,
            p: s.pressure,
            tx: s.tilt_x,
            ty: s.tilt_y,
            down: s.pen_down,
        })
        .collect()
}

#[test]
fn registries_agree() {
    assert_eq!(TASK_FEATURE_NAMES, NAMES);
}

#[test]
fn fifty_random_recordings_match_reference() {
    let mut present = 0;
    for seed in 0..50 {
        let raw = random_recording(seed);
        let rec = TaskRecording::new(Task::TmtA, to_core(&raw)).unwrap();
        for window in [1, 5] {
            let got = extract_task_features(&rec, &FeatureConfig { smoothing_window: window });
            let want = task_features(&raw, window);
            for (k, (g, w)) in got.values().iter().zip(&want).enumerate() {
                match (g, w) {
                    (Some(g), Some(w)) => {
                        present += 1;
                        assert!(rel_close(*g, *w, 1e-9), "seed {seed} w{window} {}: {g} vs {w}", NAMES[k]);
                    }
                    (None, None) => {}
                    _ => panic!("seed {seed} w{window} {}: missing mismatch {g:?} vs {w:?}", NAMES[k]),
                }
            }
        }
    }
    // most entries must be real comparisons, not agreeing missing values
    assert!(present > 50 * 2 * 30, "{present}");
}

#[test]
fn synthetic_sessions_match_reference() {
    for seed in 0..3 {
        let session = generate_session(&CohortSpec::with_theta(0.5), seed).unwrap();
        let cfg = FeatureConfig::default();
        let v = extract_session_features(&session, &cfg);
        for task in Task::ALL {
            let raw = from_core(session.recording(task).unwrap().samples());
            let want = task_features(&raw, cfg.smoothing_window);
            for (k, (g, w)) in v.task_block(task).iter().zip(&want).enumerate() {
                match (g, w) {
                    (Some(g), Some(w)) => assert!(rel_close(*g, *w, 1e-9), "{task:?} {}", NAMES[k]),
                    (g, w) => assert_eq!(g.is_some(), w.is_some(), "{task:?} {}", NAMES[k]),
                }
            }
        }
    }
}
