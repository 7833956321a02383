#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(s) {
        assert_eq!(cfg.to_text(), s);
    }
});
