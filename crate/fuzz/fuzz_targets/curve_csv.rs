#![no_main]

use ephunt::hunt::detect_eps;
use ephunt::io::{read_curve_csv, write_curve_csv};
use ephunt::models::ToyFamily;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(curve) = read_curve_csv(data) else { return };
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &curve, None).expect("write to memory");
    let back = read_curve_csv(buf.as_slice()).expect("written curve reads back");
    assert_eq!(back.len(), curve.len());
    // Keep the detector on small inputs so each run stays fast.
    if curve.len() <= 64 {
        let _ = detect_eps(&curve, &ToyFamily, 1e3);
    }
});
