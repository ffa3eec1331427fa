#![no_main]

use libfuzzer_sys::fuzz_target;
use sweeping::oracles::OracleScenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(os) = OracleScenario::from_json(text) else {
        return;
    };
    let _ = os.closed_form(0.0);
    let _ = os.closed_form(os.moving_set.horizon());
});
