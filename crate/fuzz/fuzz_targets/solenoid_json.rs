#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::solenoid::SolenoidPoint;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = SolenoidPoint::from_json(s) {
        assert_eq!(SolenoidPoint::from_json(&p.to_json()).expect("round trip"), p);
    }
});
