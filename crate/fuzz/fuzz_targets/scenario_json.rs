#![no_main]

use libfuzzer_sys::fuzz_target;
use sweeping::movingset::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(scenario) = Scenario::from_json(text) else {
        return;
    };
    let again = Scenario::from_json(&scenario.to_json()).unwrap();
    assert_eq!(again.to_json(), scenario.to_json());
    let _ = scenario.moving_set.check_admissibility();
});
