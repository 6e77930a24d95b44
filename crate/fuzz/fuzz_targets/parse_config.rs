#![no_main]

use corner_penalty::harness::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_config(text) {
        // anything accepted must survive re-validation
        cfg.validate().expect("parsed config validates");
    }
});
