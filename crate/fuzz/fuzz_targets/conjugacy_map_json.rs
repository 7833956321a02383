#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::conjugacy::ConjugacyMap;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = ConjugacyMap::from_json(s);
});
