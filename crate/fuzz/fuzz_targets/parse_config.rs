#![no_main]

use inkscreen_core::config::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(cfg) = parse_config(data) else { return };
    let text = serde_json::to_vec(&cfg).unwrap();
    assert_eq!(parse_config(&text).expect("serialized config parses"), cfg);
});
