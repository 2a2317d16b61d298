#![no_main]

use inkscreen_core::dataset::{read_labels_csv, write_labels_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_labels_csv(data) else { return };
    let mut out = Vec::new();
    write_labels_csv(&mut out, &rows).unwrap();
    assert_eq!(read_labels_csv(&out[..]).unwrap(), rows);
});
