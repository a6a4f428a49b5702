#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(o) = ckr_core::DistanceOracle::from_bytes(data) {
        assert_eq!(o.to_bytes(), data);
        for x in 0..o.n().min(16) {
            let _ = o.query(0, x);
        }
    }
});
