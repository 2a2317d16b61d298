#![no_main]

use inkscreen_core::features::{extract_session_features, FeatureConfig};
use inkscreen_core::stroke::{parse_session, validate_session};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(session) = parse_session(data) else { return };
    validate_session(&session);
    // anything accepted must survive its own serialization
    let again = parse_session(session.to_json().as_bytes()).expect("reserialized session parses");
    assert_eq!(again, session);
    let v = extract_session_features(&session, &FeatureConfig::default());
    assert!(v.values().iter().flatten().all(|x| x.is_finite()));
});
