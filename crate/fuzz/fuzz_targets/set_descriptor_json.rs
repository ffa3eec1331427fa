#![no_main]

use libfuzzer_sys::fuzz_target;
use sweeping::{Point, SetDescriptor};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(set) = serde_json::from_str::<SetDescriptor>(text) else {
        return;
    };
    let back: SetDescriptor = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
    assert_eq!(back, set);
    let _ = set.project(&Point::zeros(set.dim()));
});
