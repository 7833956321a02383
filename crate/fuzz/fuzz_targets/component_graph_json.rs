#![no_main]

use libfuzzer_sys::fuzz_target;
use limitlab::limits::{covering_trivial, ComponentGraph};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = ComponentGraph::from_json(s) {
        assert_eq!(ComponentGraph::from_json(&g.to_json()).expect("round trip"), g);
        let _ = covering_trivial(&g);
    }
});
