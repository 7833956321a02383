#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::natural_extension::History;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(h) = History::from_json(s) {
        assert_eq!(History::from_json(&h.to_json()).expect("round trip"), h);
    }
});
