#![no_main]

use ephunt::io::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = RunConfig::from_json_str(data) {
        let again = RunConfig::from_json_str(&cfg.to_json_string()).expect("emitted config parses");
        assert_eq!(again.to_json_string(), cfg.to_json_string());
    }
});
