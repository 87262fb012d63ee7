#![no_main]

use libfuzzer_sys::fuzz_target;
use repeater_cli::{parse_grid, GridSpec};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let Ok(grid) = parse_grid(&text) else {
        return;
    };
    // skip huge explicit counts; they are valid but only cost memory
    if let GridSpec::Range { points: Some(n), .. } = grid {
        if n > 4096 {
            return;
        }
    }
    let values = grid.values(16);
    assert!(!values.is_empty());
    assert!(values.iter().all(|x| x.is_finite()));
    assert_eq!(parse_grid(&grid.to_string()).ok(), Some(grid));
});
