#![no_main]

use inkscreen_core::bundle::TrainedBundle;
use inkscreen_core::features::SESSION_FEATURES;
use libfuzzer_sys::fuzz_target;
use ndarray::Array2;

fuzz_target!(|data: &[u8]| {
    let Ok(bundle) = TrainedBundle::from_json(data) else { return };
    // a loaded bundle must score any row, including an all-missing one
    let x = Array2::from_elem((1, SESSION_FEATURES), f64::NAN);
    let p = bundle.predict(x.view()).expect("validated bundle predicts");
    let total: f64 = p[0].probabilities.values().sum();
    assert!((total - 1.0).abs() < 1e-9);
});
