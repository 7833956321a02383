#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::fatou::ComponentAtlas;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(a) = ComponentAtlas::from_json(s) {
        assert_eq!(ComponentAtlas::from_json(&a.to_json()).expect("round trip"), a);
    }
});
