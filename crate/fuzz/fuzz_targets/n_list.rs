#![no_main]

use ephunt::io::parse_n_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(sizes) = parse_n_list(data) {
        assert!(!sizes.is_empty());
        assert!(sizes.iter().all(|&n| n > 0));
    }
});
