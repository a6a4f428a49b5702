#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(g) = ckr_core::parse_edge_list(s) {
            // a parsed graph must survive a round trip through its own text form
            let back = ckr_core::parse_edge_list(&g.to_edge_list()).unwrap();
            assert_eq!(back.edges(), g.edges());
        }
    }
});
