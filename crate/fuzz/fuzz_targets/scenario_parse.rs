#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Must reject or accept without panicking; accepted scenarios must
        // expose internally consistent derived fields.
        if let Ok(sc) = bifluid::scenario::parse_scenario(text) {
            let _ = sc.ratio_floor();
            let _ = sc.initial_fields();
            let _ = sc.boundary_fields();
        }
    }
});
