#![no_main]

use inkscreen_core::dataset::{read_features_csv, write_features_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = read_features_csv(data) else { return };
    let mut out = Vec::new();
    write_features_csv(&mut out, &table).unwrap();
    let again = read_features_csv(&out[..]).expect("written table reads back");
    assert_eq!(again.ids, table.ids);
    let bits = |t: &inkscreen_core::dataset::FeatureTable| t.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&again), bits(&table));
});
