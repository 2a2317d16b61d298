use inkscreen_core::bundle::{BundleError, TrainedBundle, BUNDLE_FORMAT_VERSION};
use inkscreen_core::dataset::FeatureTable;
use inkscreen_core::evaluation::CvConfig;
use inkscreen_core::features::{extract_session_features, registry_hash, FeatureConfig};
use inkscreen_core::synth::{generate_cohort, CohortSpec, ThetaDistribution};
use std::sync::OnceLock;

fn trained() -> &'static (TrainedBundle, FeatureTable) {
    static CELL: OnceLock<(TrainedBundle, FeatureTable)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cohort = generate_cohort(45, &ThetaDistribution::separated_groups(15, 15, 15), &CohortSpec::default(), 3).unwrap();
        let cfg = FeatureConfig::default();
        let vectors: Vec<_> = cohort.sessions.iter().map(|s| extract_session_features(s, &cfg)).collect();
        let table = FeatureTable::from_vectors(&vectors);
        let mut cv = CvConfig::reduced();
        cv.inner_k = 3;
        cv.fit.n_trees = 20;
        let bundle = inkscreen_core::bundle::train_bundle(&table, &cohort.subjects(), cfg, &cv, 9, "2026-01-01T00:00:00Z".into()).unwrap();
        (bundle, table)
    })
}

#[test]
fn save_load_reproduces_predictions() {
    let (bundle, table) = trained();
    let json = bundle.to_json();
    let loaded = TrainedBundle::from_json(json.as_bytes()).unwrap();
    assert_eq!(&loaded, bundle);
    let a = bundle.predict(table.values.view()).unwrap();
    let b = loaded.predict(table.values.view()).unwrap();
    for (p, q) in a.iter().zip(&b) {
        for (x, y) in p.probabilities.values().zip(q.probabilities.values()) {
            assert!((x - y).abs() <= 1e-12);
        }
        assert!((p.mmse - q.mmse).abs() <= 1e-12);
        assert!((p.mtl_atrophy_z - q.mtl_atrophy_z).abs() <= 1e-12);
        assert_eq!(p.predicted_diagnosis, q.predicted_diagnosis);
    }
    assert_eq!(loaded.to_json(), json);
}

#[test]
fn predictions_are_well_formed() {
    let (bundle, table) = trained();
    let mut rows = table.values.clone();
    // a row with every feature missing still gets a prediction
    rows.row_mut(0).fill(f64::NAN);
    for p in bundle.predict(rows.view()).unwrap() {
        let total: f64 = p.probabilities.values().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        assert!(p.probabilities.values().all(|v| (0.0..=1.0).contains(v)));
        assert!((0.0..=30.0).contains(&p.mmse));
        assert!(p.mtl_atrophy_z.is_finite());
    }
}

#[test]
fn foreign_registry_and_version_are_rejected() {
    let (bundle, _) = trained();
    let json = bundle.to_json();
    let foreign = json.replace(&registry_hash(), &"0".repeat(64));
    assert!(matches!(TrainedBundle::from_json(foreign.as_bytes()), Err(BundleError::RegistryHashMismatch { .. })));
    let future = json.replacen(
        &format!("\"format_version\": {BUNDLE_FORMAT_VERSION}"),
        "\"format_version\": 99",
        1,
    );
    assert_eq!(
        TrainedBundle::from_json(future.as_bytes()),
        Err(BundleError::BundleVersionMismatch { found: 99, expected: BUNDLE_FORMAT_VERSION })
    );
}

#[test]
fn tampered_models_are_rejected() {
    let (bundle, _) = trained();
    let mut v: serde_json::Value = serde_json::from_str(&bundle.to_json()).unwrap();
    v["mmse"]["selected"] = serde_json::json!([500]);
    let err = TrainedBundle::from_json(v.to_string().as_bytes()).unwrap_err();
    assert!(matches!(err, BundleError::Malformed(_)), "{err}");
}
