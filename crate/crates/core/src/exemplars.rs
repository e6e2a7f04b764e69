//! The compiled-in catalog of task families.
//!
//! | id | rule |
//! |----|------|
//! | `tgi.g1.stacked_segments` | sort segments by length and stack them against an edge |
//! | `tgi.g2.size_rule` | recolor objects by bounding box, 3x3 vs 5x5 |
//! | `tgi.g3.color_mapping` | fixed color substitution table |
//! | `tgi.g4.gravity` | slide colored cells toward an edge |
//! | `tgi.g5.recolor_largest` | paint the strictly largest object |
//! | `tgi.g6.symmetry` | complete a half-filled grid to mirror symmetry |
//!
//! Variable ranges keep every grid between 5x5 and 20x20.
//!
//! # Adding a family
//!
//! Write an input builder that draws one grid from the taskvars and
//! gridvars, express the rule as a DSL term over the taskvars, and add the
//! episode constraints that make the rule identifiable from the train pairs.
//! Then run the exemplar tests: every family must pass the verifier on 100
//! seeds.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use crate::dsl::build::*;
use crate::dsl::{gravity, Direction, Env, Literal, Prim, Scalar, SortKey, Term};
use crate::grid::{Color, Episode, Grid};
use crate::objects::{
    find_connected_objects, reflect, Axis, Cell, Connectivity, ExtractionMode, GridObject,
};
use crate::generator::{
    DeclaredInvariant, EpisodeConstraint, Feature, GeneratorDefinition, Relation, VarSampler, VarSpec,
};
use crate::sampler::{
    place_objects, random_subset_colors, retry, synthesize_contiguous_object, ExtentConstraint, RngStream,
    SampleError,
};

pub const G1: &str = "tgi.g1.stacked_segments";
pub const G2: &str = "tgi.g2.size_rule";
pub const G3: &str = "tgi.g3.color_mapping";
pub const G4: &str = "tgi.g4.gravity";
pub const G5: &str = "tgi.g5.recolor_largest";
pub const G6: &str = "tgi.g6.symmetry";

pub fn catalog() -> &'static [GeneratorDefinition] {
    static CATALOG: OnceLock<Vec<GeneratorDefinition>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        vec![stacked_segments(), size_rule(), color_mapping(), gravity_family(), recolor_largest(), symmetry()]
    })
}

fn color_of(env: &Env, name: &str) -> Color {
    match env.get(name) {
        Some(Scalar::Color(c)) => *c,
        other => panic!("variable `{name}` should be a color, found {other:?}"),
    }
}

fn int_of(env: &Env, name: &str) -> i64 {
    match env.get(name) {
        Some(Scalar::Int(v)) => *v,
        other => panic!("variable `{name}` should be an int, found {other:?}"),
    }
}

fn direction_of(env: &Env, name: &str) -> Direction {
    match env.get(name) {
        Some(Scalar::Direction(d)) => *d,
        other => panic!("variable `{name}` should be a direction, found {other:?}"),
    }
}

fn axis_of(env: &Env, name: &str) -> Axis {
    match env.get(name) {
        Some(Scalar::Axis(a)) => *a,
        other => panic!("variable `{name}` should be an axis, found {other:?}"),
    }
}

fn dims(gridvars: &Env) -> (usize, usize) {
    (int_of(gridvars, "height") as usize, int_of(gridvars, "width") as usize)
}

fn blank(h: usize, w: usize) -> Grid {
    Grid::filled(h, w, Color::BACKGROUND).expect("exemplar dimensions are in range")
}

fn dims_spec(lo: i64, hi: i64) -> Vec<VarSpec> {
    vec![VarSpec::new("height", VarSampler::IntRange(lo, hi)), VarSpec::new("width", VarSampler::IntRange(lo, hi))]
}

fn conn(c: Connectivity) -> Term {
    lit(Literal::Connectivity(c))
}

fn same_color_objects(c: Connectivity) -> Term {
    prim(Prim::Objects, vec![input(), conn(c), color(0)])
}

// G1: stacked segments.

fn g1_input(rng: &mut RngStream, _: &Env, gv: &Env) -> Result<Grid, SampleError> {
    let (h, w) = dims(gv);
    let n = int_of(gv, "count") as usize;
    let mut lengths: Vec<i64> = (1..=w as i64).collect();
    rng.shuffle(&mut lengths);
    let colors = random_subset_colors(rng, n, &BTreeSet::from([Color::BACKGROUND]))?;
    let segments: Vec<GridObject> = lengths[..n]
        .iter()
        .zip(colors)
        .map(|(&len, color)| {
            GridObject::new((0..len as i32).map(|col| Cell { row: 0, col, color })).expect("length >= 1")
        })
        .collect();
    Ok(place_objects(rng, &blank(h, w), &segments, 1)?.grid)
}

fn g1_transform(_: &Env) -> Term {
    let sorted = prim(
        Prim::SortObjectsBy,
        vec![same_color_objects(Connectivity::Four), lit(Literal::SortKey(SortKey::Size)), lit(Literal::Bool(true))],
    );
    let canvas = prim(
        Prim::Canvas,
        vec![prim(Prim::Height, vec![input()]), prim(Prim::Width, vec![input()]), color(0)],
    );
    prim(Prim::Stack, vec![sorted, canvas, var("dir"), var("align")])
}

fn stacked_segments() -> GeneratorDefinition {
    let mut gridvars = dims_spec(6, 12);
    gridvars.push(VarSpec::new("count", VarSampler::IntRange(2, 5)));
    GeneratorDefinition {
        id: G1,
        summary: "sort horizontal segments by length and stack them against an edge",
        taskvars: vec![
            VarSpec::new("dir", VarSampler::OneOf(vec![Scalar::Direction(Direction::Top), Scalar::Direction(Direction::Bottom)])),
            VarSpec::new("align", VarSampler::OneOf(vec![Scalar::Direction(Direction::Left), Scalar::Direction(Direction::Right)])),
        ],
        gridvars,
        input_builder: g1_input,
        transform_builder: g1_transform,
        train_count: (3, 5),
        test_count: (1, 1),
        constraints: vec![
            EpisodeConstraint::NoTestOnlyColors,
            EpisodeConstraint::NoTestOnlyObjectSizes { conn: Connectivity::Four, mode: ExtractionMode::same_color() },
        ],
        input_template: vec![
            "The input grid contains a few horizontal segments on a black background.",
            "Each segment has its own color and a length different from the others.",
        ],
        transform_template: vec![
            "Order the segments from longest to shortest.",
            "Stack them one per row against the {dir} edge, the longest segment outermost.",
            "Push every segment against the {align} edge.",
            "All remaining cells are black.",
        ],
        invariants: vec![DeclaredInvariant { name: "segments_conserved", check: segments_conserved }],
        intended_shortcuts: BTreeSet::new(),
    }
}

fn segments_conserved(_: &Env, i: &Grid, o: &Grid) -> bool {
    let sig = |g: &Grid| {
        let mut v: Vec<(usize, Color)> = find_connected_objects(g, Connectivity::Four, ExtractionMode::same_color())
            .iter()
            .map(|s| (s.size(), s.cells()[0].color))
            .collect();
        v.sort();
        v
    };
    sig(i) == sig(o)
}

// G2: size-dependent rule.

fn square_object(rng: &mut RngStream, side: usize, color: Color) -> Result<GridObject, SampleError> {
    let ext = if side == 3 {
        ExtentConstraint::new(5, 9, (3, 3))
    } else {
        ExtentConstraint::new(9, 20, (side, side))
    };
    let (obj, _) = retry(
        rng,
        crate::sampler::GRID_ATTEMPTS,
        |rng| synthesize_contiguous_object(rng, Connectivity::Four, ext, color),
        |o| o.as_ref().is_ok_and(|o| o.bbox().height() == side && o.bbox().width() == side),
    )?;
    obj
}

fn g2_input(rng: &mut RngStream, tv: &Env, gv: &Env) -> Result<Grid, SampleError> {
    let (h, w) = dims(gv);
    let n = int_of(gv, "count") as usize;
    let color = color_of(tv, "obj_color");
    let objects = (0..n)
        .map(|_| {
            let side = match int_of(gv, "size_mode") {
                0 => 3,
                1 => 5,
                _ => *rng.pick(&[3, 5]),
            };
            square_object(rng, side, color)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(place_objects(rng, &blank(h, w), &objects, 1)?.grid)
}

fn g2_transform(_: &Env) -> Term {
    let is_small = prim(
        Prim::And,
        vec![
            prim(Prim::Eq, vec![prim(Prim::BBoxHeight, vec![var("o")]), int(3)]),
            prim(Prim::Eq, vec![prim(Prim::BBoxWidth, vec![var("o")]), int(3)]),
        ],
    );
    let body = prim(
        Prim::If,
        vec![is_small, prim(Prim::Recolor, vec![var("o"), var("c3")]), prim(Prim::Recolor, vec![var("o"), var("c5")])],
    );
    fold_overlay(map("o", same_color_objects(Connectivity::Eight), body), input())
}

/// Bounding-box sides of the single-color objects of `g`.
pub fn object_sides(g: &Grid) -> BTreeSet<(usize, usize)> {
    find_connected_objects(g, Connectivity::Eight, ExtractionMode::same_color())
        .iter()
        .map(|o| (o.bbox().height(), o.bbox().width()))
        .collect()
}

fn train_has_both_sizes(inputs: &[&Grid]) -> bool {
    let has = |side: usize| inputs.iter().any(|g| object_sides(g).contains(&(side, side)));
    has(3) && has(5)
}

fn size_rule() -> GeneratorDefinition {
    let mut gridvars = dims_spec(12, 20);
    gridvars.push(VarSpec::new("count", VarSampler::IntRange(1, 5)));
    // 0: only 3x3 objects, 1: only 5x5, 2: mixed.
    gridvars.push(VarSpec::new("size_mode", VarSampler::IntRange(0, 2)));
    GeneratorDefinition {
        id: G2,
        summary: "recolor each object by its bounding box size (3x3 or 5x5)",
        taskvars: vec![
            VarSpec::new("obj_color", VarSampler::foreground_color()),
            VarSpec::new("c3", VarSampler::foreground_color()),
            VarSpec::new("c5", VarSampler::foreground_color()),
        ],
        gridvars,
        input_builder: g2_input,
        transform_builder: g2_transform,
        train_count: (3, 5),
        test_count: (1, 1),
        constraints: vec![
            EpisodeConstraint::CoveragePredicate { name: "train_has_3x3_and_5x5", predicate: train_has_both_sizes },
            EpisodeConstraint::TestDistinctness {
                feature: Feature::ObjectCount(Connectivity::Eight),
                relation: Relation::DiffersFromAllTrain,
            },
        ],
        input_template: vec![
            "Each grid shows {obj_color:color_name} objects on black.",
            "Every object fits exactly in a 3x3 or a 5x5 bounding box.",
        ],
        transform_template: vec![
            "Recolor every object with a 3x3 bounding box to {c3:color_name}.",
            "Recolor every object with a 5x5 bounding box to {c5:color_name}.",
            "Background cells stay black.",
        ],
        invariants: vec![],
        intended_shortcuts: BTreeSet::new(),
    }
}

// G3: color mapping.

const G3_SOURCES: [&str; 3] = ["s1", "s2", "s3"];
const G3_TARGETS: [&str; 3] = ["d1", "d2", "d3"];

fn g3_input(rng: &mut RngStream, tv: &Env, gv: &Env) -> Result<Grid, SampleError> {
    let (h, w) = dims(gv);
    let k = int_of(gv, "colors") as usize;
    let mut sources: Vec<Color> = G3_SOURCES.iter().map(|n| color_of(tv, n)).collect();
    rng.shuffle(&mut sources);
    sources.truncate(k);
    let shape = synthesize_contiguous_object(rng, Connectivity::Four, ExtentConstraint::new(4, 12, (4, 5)), sources[0])?;
    let mut order: Vec<usize> = (0..shape.size()).collect();
    rng.shuffle(&mut order);
    let mut colors = vec![sources[0]; shape.size()];
    for (slot, &cell) in order.iter().enumerate() {
        colors[cell] = if slot < k { sources[slot] } else { *rng.pick(&sources) };
    }
    let object = GridObject::new(shape.cells().iter().zip(colors).map(|(c, color)| Cell { color, ..*c }))
        .expect("same cells");
    Ok(place_objects(rng, &blank(h, w), &[object], 0)?.grid)
}

fn g3_transform(_: &Env) -> Term {
    let mut args = vec![input()];
    for (s, d) in G3_SOURCES.iter().zip(G3_TARGETS) {
        args.push(var(s));
        args.push(var(d));
    }
    prim(Prim::RecolorMap, args)
}

fn color_mapping() -> GeneratorDefinition {
    let mut gridvars = dims_spec(6, 14);
    gridvars.push(VarSpec::new("colors", VarSampler::IntRange(1, 3)));
    GeneratorDefinition {
        id: G3,
        summary: "apply a fixed color substitution table",
        taskvars: G3_SOURCES
            .iter()
            .chain(&G3_TARGETS)
            .map(|n| VarSpec::new(n, VarSampler::foreground_color()))
            .collect(),
        gridvars,
        input_builder: g3_input,
        transform_builder: g3_transform,
        train_count: (3, 5),
        test_count: (1, 1),
        constraints: vec![
            EpisodeConstraint::TestDistinctness { feature: Feature::ColorCount, relation: Relation::DiffersFromAllTrain },
            EpisodeConstraint::NoTestOnlyColors,
        ],
        input_template: vec![
            "Each grid holds one object on black.",
            "The object is painted with some of {s1:color_name}, {s2:color_name} and {s3:color_name}.",
        ],
        transform_template: vec![
            "Replace {s1:color_name} with {d1:color_name}.",
            "Replace {s2:color_name} with {d2:color_name}.",
            "Replace {s3:color_name} with {d3:color_name}.",
            "Leave the background unchanged.",
        ],
        invariants: vec![],
        intended_shortcuts: BTreeSet::new(),
    }
}

// G4: gravity.

fn g4_input(rng: &mut RngStream, tv: &Env, gv: &Env) -> Result<Grid, SampleError> {
    let (h, w) = dims(gv);
    let density = int_of(gv, "density") as u64;
    let palette = [color_of(tv, "p1"), color_of(tv, "p2")];
    let mut g = blank(h, w);
    for r in 0..h {
        for c in 0..w {
            if rng.chance(density, 100) {
                g.set(r, c, *rng.pick(&palette));
            }
        }
    }
    if gravity(&g, direction_of(tv, "edge"), Color::BACKGROUND) == g {
        return Err(SampleError::BudgetExhausted { attempts: 1, what: "input already settled".into() });
    }
    Ok(g)
}

fn g4_transform(_: &Env) -> Term {
    prim(Prim::Gravity, vec![input(), var("edge"), color(0)])
}

fn inputs_distinct(e: &Episode) -> bool {
    let inputs: BTreeSet<Vec<Color>> = e.pairs().map(|(_, _, p)| p.input.cells().to_vec()).collect();
    inputs.len() == e.grid_count() / 2
}

/// Multiset of colors along each line parallel to the motion.
fn line_multisets(g: &Grid, vertical: bool) -> Vec<Vec<Color>> {
    let (lines, len) = if vertical { (g.width(), g.height()) } else { (g.height(), g.width()) };
    (0..lines)
        .map(|l| {
            let mut v: Vec<Color> = (0..len).map(|i| if vertical { g.get(i, l) } else { g.get(l, i) }).collect();
            v.sort();
            v
        })
        .collect()
}

fn lines_preserved(tv: &Env, i: &Grid, o: &Grid) -> bool {
    let vertical = direction_of(tv, "edge").is_vertical();
    i.height() == o.height() && i.width() == o.width() && line_multisets(i, vertical) == line_multisets(o, vertical)
}

fn gravity_family() -> GeneratorDefinition {
    let mut gridvars = dims_spec(5, 12);
    gridvars.push(VarSpec::new("density", VarSampler::IntRange(10, 35)));
    GeneratorDefinition {
        id: G4,
        summary: "slide every colored cell toward one edge",
        taskvars: vec![
            VarSpec::new("edge", VarSampler::OneOf(Direction::ALL.iter().map(|d| Scalar::Direction(*d)).collect())),
            VarSpec::new("p1", VarSampler::foreground_color()),
            VarSpec::new("p2", VarSampler::foreground_color()),
        ],
        gridvars,
        input_builder: g4_input,
        transform_builder: g4_transform,
        train_count: (3, 5),
        test_count: (1, 1),
        constraints: vec![
            EpisodeConstraint::CustomPredicate { name: "inputs_distinct", predicate: inputs_distinct },
            EpisodeConstraint::NoTestOnlyColors,
        ],
        input_template: vec!["Cells of {p1:color_name} and {p2:color_name} are scattered over a black grid."],
        transform_template: vec![
            "Every colored cell falls toward the {edge} edge until it meets the border or another colored cell.",
            "Cells keep their order along each line.",
        ],
        invariants: vec![DeclaredInvariant { name: "line_multisets_preserved", check: lines_preserved }],
        intended_shortcuts: BTreeSet::new(),
    }
}

// G5: recolor the largest object.

fn g5_input(rng: &mut RngStream, tv: &Env, gv: &Env) -> Result<Grid, SampleError> {
    let (h, w) = dims(gv);
    let n = int_of(gv, "count") as usize;
    let palette = [color_of(tv, "p1"), color_of(tv, "p2")];
    let objects = (0..n)
        .map(|_| {
            let color = *rng.pick(&palette);
            synthesize_contiguous_object(rng, Connectivity::Four, ExtentConstraint::new(1, 10, (4, 4)), color)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut sizes: Vec<usize> = objects.iter().map(GridObject::size).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    if sizes.len() > 1 && sizes[0] == sizes[1] {
        return Err(SampleError::BudgetExhausted { attempts: 1, what: "tied largest object".into() });
    }
    Ok(place_objects(rng, &blank(h, w), &objects, 1)?.grid)
}

fn g5_transform(_: &Env) -> Term {
    let biggest = var("biggest");
    let_(
        "biggest",
        prim(Prim::Largest, vec![same_color_objects(Connectivity::Four)]),
        prim(
            Prim::If,
            vec![
                prim(Prim::Eq, vec![prim(Prim::CountObjects, vec![biggest.clone()]), int(1)]),
                prim(Prim::Paint, vec![input(), prim(Prim::First, vec![biggest]), var("target")]),
                input(),
            ],
        ),
    )
}

/// Number of input objects whose cells changed color in the output, or
/// `None` if the foreground layout changed.
pub fn recolored_objects(i: &Grid, o: &Grid) -> Option<usize> {
    if i.height() != o.height() || i.width() != o.width() {
        return None;
    }
    let fg = |g: &Grid| -> Vec<bool> { g.cells().iter().map(|c| *c != Color::BACKGROUND).collect() };
    if fg(i) != fg(o) {
        return None;
    }
    let objs = find_connected_objects(i, Connectivity::Four, ExtractionMode::same_color());
    Some(
        objs.iter()
            .filter(|obj| obj.cells().iter().any(|c| o.get(c.row as usize, c.col as usize) != c.color))
            .count(),
    )
}

fn one_object_recolored(_: &Env, i: &Grid, o: &Grid) -> bool {
    recolored_objects(i, o) == Some(1)
}

fn recolor_largest() -> GeneratorDefinition {
    let mut gridvars = dims_spec(8, 16);
    gridvars.push(VarSpec::new("count", VarSampler::IntRange(2, 5)));
    GeneratorDefinition {
        id: G5,
        summary: "paint the strictly largest object in a target color",
        taskvars: vec![
            VarSpec::new("target", VarSampler::foreground_color()),
            VarSpec::new("p1", VarSampler::foreground_color()),
            VarSpec::new("p2", VarSampler::foreground_color()),
        ],
        gridvars,
        input_builder: g5_input,
        transform_builder: g5_transform,
        train_count: (3, 5),
        test_count: (1, 1),
        constraints: vec![EpisodeConstraint::NoTestOnlyColors],
        input_template: vec![
            "Several {p1:color_name} and {p2:color_name} objects lie on a black grid.",
            "Exactly one object is larger than all the others.",
        ],
        transform_template: vec!["Find the largest object.", "Paint it {target:color_name}.", "Everything else stays as it is."],
        invariants: vec![DeclaredInvariant { name: "one_object_recolored", check: one_object_recolored }],
        intended_shortcuts: BTreeSet::new(),
    }
}

// G6: symmetry completion.

fn g6_input(rng: &mut RngStream, tv: &Env, gv: &Env) -> Result<Grid, SampleError> {
    let (h, w) = dims(gv);
    let axis = axis_of(tv, "axis");
    let palette = [color_of(tv, "p1"), color_of(tv, "p2")];
    // The strict first half; an odd middle line stays empty.
    let (hh, hw) = match axis {
        Axis::Horizontal => (h / 2, w),
        Axis::Vertical => (h, w / 2),
    };
    let max_size = (hh * hw).min(14);
    let shape =
        synthesize_contiguous_object(rng, Connectivity::Eight, ExtentConstraint::new(3, max_size, (hh, hw)), palette[0])?;
    let pattern = GridObject::new(shape.cells().iter().map(|c| Cell { color: *rng.pick(&palette), ..*c }))
        .expect("same cells");
    let half = place_objects(rng, &blank(hh, hw), &[pattern], 0)?.grid;
    let mut g = blank(h, w);
    for (r, c, color) in half.iter() {
        g.set(r, c, color);
    }
    Ok(g)
}

fn g6_transform(_: &Env) -> Term {
    let mirrored = prim(
        Prim::Blobs,
        vec![prim(Prim::Reflect, vec![input(), var("axis")]), conn(Connectivity::Eight), color(0)],
    );
    prim(Prim::Overlay, vec![input(), prim(Prim::First, vec![mirrored])])
}

fn mirror_symmetric(tv: &Env, _: &Grid, o: &Grid) -> bool {
    reflect(o, axis_of(tv, "axis")) == *o
}

fn symmetry() -> GeneratorDefinition {
    GeneratorDefinition {
        id: G6,
        summary: "complete a half-filled grid to mirror symmetry",
        taskvars: vec![
            VarSpec::new("axis", VarSampler::OneOf(vec![Scalar::Axis(Axis::Horizontal), Scalar::Axis(Axis::Vertical)])),
            VarSpec::new("p1", VarSampler::foreground_color()),
            VarSpec::new("p2", VarSampler::foreground_color()),
        ],
        gridvars: dims_spec(5, 14),
        input_builder: g6_input,
        transform_builder: g6_transform,
        train_count: (3, 5),
        test_count: (1, 1),
        constraints: vec![EpisodeConstraint::NoTestOnlyColors],
        input_template: vec![
            "A connected {p1:color_name} and {p2:color_name} pattern sits on one side of the {axis} midline.",
            "The other side is empty.",
        ],
        transform_template: vec![
            "Reflect the pattern across the {axis} midline.",
            "Draw the reflection into the empty side so the grid becomes mirror symmetric.",
        ],
        invariants: vec![DeclaredInvariant { name: "mirror_symmetric", check: mirror_symmetric }],
        intended_shortcuts: BTreeSet::new(),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::generator::{check_constraints, create_task, lookup};

    fn sample(id: &str, seed: u64) -> crate::generator::TaskSample {
        create_task(lookup(id).unwrap(), seed).unwrap_or_else(|e| panic!("{id} seed {seed}: {e}"))
    }

    #[test]
    fn catalog_ids_and_definitions() {
        let ids: Vec<&str> = catalog().iter().map(|d| d.id).collect();
        assert_eq!(ids, [G1, G2, G3, G4, G5, G6]);
        for d in catalog() {
            d.validate().unwrap();
        }
    }

    #[test]
    fn g1_all_orientations_occur() {
        let mut seen = BTreeSet::new();
        for seed in 0..200 {
            let s = sample(G1, seed);
            seen.insert((s.taskvars["dir"], s.taskvars["align"]));
        }
        assert_eq!(seen.len(), 4, "{seen:?}");
    }

    #[test]
    fn g1_bottom_right_matches_original_convention() {
        let seed = (0..200).find(|&s| {
            let t = sample(G1, s);
            t.taskvars["dir"] == Scalar::Direction(Direction::Bottom) && t.taskvars["align"] == Scalar::Direction(Direction::Right)
        });
        let s = sample(G1, seed.expect("bottom/right occurs"));
        for (_, _, p) in s.episode.pairs() {
            // Bottom row holds the longest segment, flush right.
            let w = p.output.width();
            let last: Vec<Color> = (0..w).map(|c| p.output.get(p.output.height() - 1, c)).collect();
            let longest = find_connected_objects(&p.input, Connectivity::Four, ExtractionMode::same_color())
                .iter()
                .map(GridObject::size)
                .max()
                .unwrap();
            assert!(last[w - longest..].iter().all(|c| *c != Color::BACKGROUND));
            assert!(last[..w - longest].iter().all(|c| *c == Color::BACKGROUND));
        }
    }

    #[test]
    fn g2_coverage_and_behaviors() {
        for seed in 0..300 {
            let s = sample(G2, seed);
            let inputs: Vec<&Grid> = s.episode.train.iter().map(|p| &p.input).collect();
            assert!(train_has_both_sizes(&inputs));
            let (c3, c5) = (color_of(&s.taskvars, "c3"), color_of(&s.taskvars, "c5"));
            let out_colors: BTreeSet<Color> =
                s.episode.train.iter().flat_map(|p| p.output.cells().iter().copied()).collect();
            assert!(out_colors.contains(&c3) && out_colors.contains(&c5));
        }
    }

    #[test]
    fn g2_without_coverage_can_miss_a_size() {
        let mut def = lookup(G2).unwrap().clone();
        def.constraints.retain(|c| c.kind() != "coverage");
        let missing = (0..300)
            .filter(|&seed| {
                let s = create_task(&def, seed).unwrap();
                let inputs: Vec<&Grid> = s.episode.train.iter().map(|p| &p.input).collect();
                !train_has_both_sizes(&inputs)
            })
            .count();
        assert!(missing > 0);
    }

    /// Cell-by-cell color pairs of one pair of grids.
    fn mapping(p: &crate::grid::Pair) -> BTreeMap<Color, Color> {
        p.input.cells().iter().copied().zip(p.output.cells().iter().copied()).collect()
    }

    #[test]
    fn g3_mapping_is_constant() {
        for seed in 0..200 {
            let s = sample(G3, seed);
            let mut table: BTreeMap<Color, Color> = BTreeMap::new();
            for (_, _, p) in s.episode.pairs() {
                for (from, to) in mapping(p) {
                    assert_eq!(*table.entry(from).or_insert(to), to, "seed {seed}");
                }
            }
            assert_eq!(table.get(&Color::BACKGROUND), Some(&Color::BACKGROUND));
            let count = |g: &Grid| g.cells().iter().filter(|c| **c != Color::BACKGROUND).collect::<BTreeSet<_>>().len();
            let train: BTreeSet<usize> = s.episode.train.iter().map(|p| count(&p.input)).collect();
            assert!(!train.contains(&count(&s.episode.test[0].input)));
        }
    }

    #[test]
    fn g4_conserves_lines() {
        for seed in 0..100 {
            let s = sample(G4, seed);
            let vertical = direction_of(&s.taskvars, "edge").is_vertical();
            for (_, _, p) in s.episode.pairs() {
                assert_eq!(line_multisets(&p.input, vertical), line_multisets(&p.output, vertical));
            }
        }
    }

    #[test]
    fn g5_changes_one_object() {
        for seed in 0..100 {
            let s = sample(G5, seed);
            for (_, _, p) in s.episode.pairs() {
                assert_eq!(recolored_objects(&p.input, &p.output), Some(1));
            }
        }
    }

    #[test]
    fn g6_outputs_are_symmetric() {
        for seed in 0..100 {
            let s = sample(G6, seed);
            let axis = axis_of(&s.taskvars, "axis");
            for (_, _, p) in s.episode.pairs() {
                assert_eq!(reflect(&p.output, axis), p.output);
                assert_ne!(p.input, p.output);
            }
        }
    }

    #[test]
    fn samples_satisfy_their_constraints() {
        for d in catalog() {
            for seed in 0..30 {
                let s = create_task(d, seed).unwrap();
                assert!(check_constraints(&s.episode, &d.constraints).iter().all(|c| c.passed));
                assert!(s.input_reasoning.iter().chain(&s.transform_reasoning).all(|l| !l.contains('{')));
            }
        }
    }

    #[test]
    fn witness_depends_on_taskvars_only() {
        for d in catalog() {
            let s = create_task(d, 5).unwrap();
            let rebuilt = crate::dsl::partial_eval(&(d.transform_builder)(&s.taskvars), &s.taskvars).unwrap();
            assert_eq!(rebuilt, s.witness);
        }
    }

    #[test]
    fn gridvars_vary_within_an_episode() {
        for d in catalog() {
            let s = create_task(d, 11).unwrap();
            let distinct: BTreeSet<Vec<Color>> = s.episode.pairs().map(|(_, _, p)| p.input.cells().to_vec()).collect();
            assert!(distinct.len() > 1, "{}", d.id);
        }
    }
}
