#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::poly::{format_complex, parse_complex};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(z) = parse_complex(s) {
        if z.is_finite() {
            let back = parse_complex(&format_complex(z)).expect("format reparses");
            assert_eq!((back.re.to_bits(), back.im.to_bits()), (z.re.to_bits(), z.im.to_bits()));
        }
    }
});
