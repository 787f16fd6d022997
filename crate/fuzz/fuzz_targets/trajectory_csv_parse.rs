#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(traj) = bifluid::report::parse_trajectory_csv(text) {
            // Accepted trajectories are rectangular by construction.
            let n = traj.cells();
            assert!(n > 0);
            for s in &traj.snapshots {
                assert_eq!(s.rho.len(), n);
                assert_eq!(s.ratio.len(), n);
            }
        }
    }
});
