#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::limits::{parse_word, winding_vector};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(word) = parse_word(s) {
        let _ = winding_vector(&word, 8);
    }
});
