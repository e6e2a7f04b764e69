//! Algebraic and serialization laws over random grids.

use proptest::prelude::*;
use taskforge::dsl::{parse_source, render_source};
use taskforge::grid::{color_histogram, parse_arc_json, serialize_arc_json, Color, Episode, Grid, Pair};
use taskforge::objects::{crop_to_bbox, find_connected_objects, reflect, rotate, Axis, Connectivity, ExtractionMode};

fn arb_grid(max: usize) -> impl Strategy<Value = Grid> {
    (1..=max, 1..=max).prop_flat_map(|(h, w)| {
        proptest::collection::vec(0u8..10, h * w)
            .prop_map(move |cells| Grid::new(h, w, cells.into_iter().map(Color::of).collect()).unwrap())
    })
}

fn arb_episode() -> impl Strategy<Value = Episode> {
    let pair = || (arb_grid(30), arb_grid(30)).prop_map(|(input, output)| Pair { input, output });
    (proptest::collection::vec(pair(), 1..4), proptest::collection::vec(pair(), 1..3))
        .prop_map(|(train, test)| Episode { train, test })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rotate_four_times_is_identity(g in arb_grid(12)) {
        let mut r = g.clone();
        for _ in 0..4 {
            r = rotate(&r, 1).unwrap();
        }
        prop_assert_eq!(r, g);
    }

    #[test]
    fn reflect_twice_is_identity(g in arb_grid(12)) {
        for axis in [Axis::Horizontal, Axis::Vertical] {
            prop_assert_eq!(reflect(&reflect(&g, axis), axis), g.clone());
        }
    }

    #[test]
    fn half_turn_is_both_reflections(g in arb_grid(12)) {
        let both = reflect(&reflect(&g, Axis::Vertical), Axis::Horizontal);
        prop_assert_eq!(rotate(&g, 2).unwrap(), both);
    }

    #[test]
    fn quarter_turn_swaps_dimensions(g in arb_grid(12)) {
        let r = rotate(&g, 1).unwrap();
        prop_assert_eq!((r.height(), r.width()), (g.width(), g.height()));
    }

    #[test]
    fn histogram_sums_to_area(g in arb_grid(30)) {
        prop_assert_eq!(color_histogram(&g).values().sum::<usize>(), g.area());
    }

    #[test]
    fn crop_matches_object_extent(g in arb_grid(10)) {
        for o in find_connected_objects(&g, Connectivity::Eight, ExtractionMode::same_color()) {
            let c = crop_to_bbox(&g, &o).unwrap();
            prop_assert_eq!((c.height(), c.width()), (o.bbox().height(), o.bbox().width()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn arc_json_round_trips(e in arb_episode()) {
        let bytes = serialize_arc_json(&e);
        let back = parse_arc_json(&bytes).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(serialize_arc_json(&back), bytes);
    }
}

#[test]
fn exemplar_witnesses_round_trip_through_text() {
    for d in taskforge::exemplars::catalog() {
        for seed in 0..20 {
            let s = taskforge::generator::create_task(d, seed).unwrap();
            let text = render_source(&s.witness);
            assert_eq!(parse_source(&text).unwrap(), s.witness, "{text}");
        }
    }
}
