#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::ComplexPolynomial;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = s.parse::<ComplexPolynomial>() {
        let back: ComplexPolynomial = p.to_string().parse().expect("display reparses");
        assert_eq!(back, p);
    }
});
