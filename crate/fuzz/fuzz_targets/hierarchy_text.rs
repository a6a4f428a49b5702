#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(h) = ckr_core::parse_hierarchy(s) {
            let u = ckr_core::hierarchy_to_ultrametric(&h);
            assert_eq!(u.num_nodes(), h.num_nodes());
        }
    }
});
