use proptest::prelude::*;

use repeater_cli::{parse_config, parse_grid, GridSpec};

proptest! {
    #[test]
    fn grid_parser_never_panics(s in "\\PC{0,40}") {
        let _ = parse_grid(&s);
    }

    #[test]
    fn config_parser_never_panics(s in "[a-z_=#:,.0-9 \\n-]{0,120}") {
        let _ = parse_config(&s);
    }

    #[test]
    fn displayed_grids_parse_back(
        values in prop::collection::vec(-1e6f64..1e6, 1..6),
        start in -100.0f64..100.0, stop in -100.0f64..100.0, n in prop::option::of(1usize..1000),
    ) {
        let list = GridSpec::Values(values);
        prop_assert_eq!(parse_grid(&list.to_string()).unwrap(), list);
        let range = GridSpec::Range { start, stop, points: n };
        prop_assert_eq!(parse_grid(&range.to_string()).unwrap(), range);
    }

    #[test]
    fn ranges_hit_both_ends_with_the_requested_count(
        start in -100.0f64..100.0, stop in -100.0f64..100.0, n in 2usize..500,
    ) {
        let v = GridSpec::Range { start, stop, points: Some(n) }.values(400);
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], start);
        prop_assert_eq!(v[n - 1], stop);
    }

    #[test]
    fn config_assignments_round_trip(g in 0.01f64..10.0, points in 1usize..5000) {
        let text = format!("g = {g}\npoints={points}\n");
        let s = parse_config(&text).unwrap();
        prop_assert_eq!(s.g, Some(GridSpec::single(g)));
        prop_assert_eq!(s.points, Some(points));
    }
}
