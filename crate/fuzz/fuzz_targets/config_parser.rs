//! Arbitrary text through the key = value config parser. Must not panic; a successful
//! parse must hold only values the parser itself accepts.

#![no_main]

use libfuzzer_sys::fuzz_target;
use repeater_cli::{parse_config, parse_grid, GridSpec};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(settings) = parse_config(&text) {
        let grids = [
            &settings.omega_m,
            &settings.g,
            &settings.lambda1_t,
            &settings.lambda1_tau,
        ];
        for grid in grids.into_iter().flatten() {
            let again: GridSpec = parse_grid(&grid.to_string()).expect("displayed grid reparses");
            assert_eq!(&again, grid);
        }
        if let Some(case) = settings.case_id {
            assert!((1..=4).contains(&case));
        }
        assert_ne!(settings.points, Some(0));
    }
});
