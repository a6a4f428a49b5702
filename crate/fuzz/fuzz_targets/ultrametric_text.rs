#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(t) = ckr_core::parse_ultrametric(s) {
            let points: Vec<usize> = t.points().take(8).collect();
            for &x in &points {
                for &y in &points {
                    assert_eq!(t.distance(x, y).unwrap(), t.distance(y, x).unwrap());
                }
            }
        }
    }
});
