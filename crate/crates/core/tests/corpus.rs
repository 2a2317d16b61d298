//! The checked-in fuzz seeds, replayed through the same entry points and
//! properties as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use inkscreen_core::bundle::TrainedBundle;
use inkscreen_core::config::parse_config;
use inkscreen_core::dataset::{read_features_csv, read_labels_csv, write_features_csv, write_labels_csv};
use inkscreen_core::features::{extract_session_features, FeatureConfig, SESSION_FEATURES};
use inkscreen_core::stroke::parse_session;
use ndarray::Array2;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn session_seeds() {
    for (name, bytes) in seeds("parse_session") {
        let expect_ok = !matches!(name.as_str(), "pressure_out_of_range.json" | "empty_tasks.json");
        match parse_session(&bytes) {
            Ok(s) => {
                assert!(expect_ok, "{name} parsed");
                assert_eq!(parse_session(s.to_json().as_bytes()).unwrap(), s, "{name}");
                let v = extract_session_features(&s, &FeatureConfig::default());
                assert!(v.values().iter().flatten().all(|x| x.is_finite()), "{name}");
            }
            Err(e) => assert!(!expect_ok, "{name}: {e}"),
        }
    }
}

#[test]
fn feature_csv_seeds() {
    for (name, bytes) in seeds("features_csv") {
        let table = read_features_csv(&bytes[..]).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut out = Vec::new();
        write_features_csv(&mut out, &table).unwrap();
        assert_eq!(out, bytes, "{name} is in canonical form");
    }
}

#[test]
fn label_csv_seeds() {
    for (name, bytes) in seeds("labels_csv") {
        let rows = read_labels_csv(&bytes[..]).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut out = Vec::new();
        write_labels_csv(&mut out, &rows).unwrap();
        assert_eq!(read_labels_csv(&out[..]).unwrap(), rows, "{name}");
    }
}

#[test]
fn bundle_seeds() {
    let x = Array2::from_elem((1, SESSION_FEATURES), f64::NAN);
    for (name, bytes) in seeds("load_bundle") {
        let b = TrainedBundle::from_json(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        let p = b.predict(x.view()).unwrap();
        assert!((p[0].probabilities.values().sum::<f64>() - 1.0).abs() < 1e-9, "{name}");
    }
}

#[test]
fn config_seeds() {
    for (name, bytes) in seeds("parse_config") {
        let cfg = parse_config(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_config(&serde_json::to_vec(&cfg).unwrap()).unwrap(), cfg, "{name}");
    }
}
