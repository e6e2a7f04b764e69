//! Component extraction against an independent union-find labeling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use taskforge::grid::{Color, Grid};
use taskforge::objects::{find_connected_objects, Connectivity, ExtractionKind, ExtractionMode};

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    let mut j = i;
    while parent[j] != root {
        let next = parent[j];
        parent[j] = root;
        j = next;
    }
    root
}

/// Components as sorted `(row, col, color)` lists, ordered by their first
/// cell in row-major order.
fn oracle(g: &Grid, eight: bool, same_color: bool, bg: Color) -> Vec<Vec<(usize, usize, u8)>> {
    let (h, w) = (g.height(), g.width());
    let mut parent: Vec<usize> = (0..h * w).collect();
    let joins = |a: Color, b: Color| a != bg && b != bg && (!same_color || a == b);
    for r in 0..h {
        for c in 0..w {
            let mut neighbors = vec![(r + 1, c), (r, c + 1)];
            if eight {
                neighbors.push((r + 1, c + 1));
                if c > 0 {
                    neighbors.push((r + 1, c - 1));
                }
            }
            for (nr, nc) in neighbors {
                if nr < h && nc < w && joins(g.get(r, c), g.get(nr, nc)) {
                    let (a, b) = (find(&mut parent, r * w + c), find(&mut parent, nr * w + nc));
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize, u8)>> = BTreeMap::new();
    for r in 0..h {
        for c in 0..w {
            if g.get(r, c) != bg {
                groups.entry(find(&mut parent, r * w + c)).or_default().push((r, c, g.get(r, c).value()));
            }
        }
    }
    let mut comps: Vec<_> = groups.into_values().collect();
    comps.sort_by_key(|cells| (cells[0].0, cells[0].1));
    comps
}

#[test]
fn matches_union_find_on_random_grids() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
    let mut mismatches = 0;
    for i in 0..1000 {
        let (h, w) = (rng.gen_range(1..=10), rng.gen_range(1..=10));
        // Few colors so components are large and touch diagonally.
        let palette = rng.gen_range(2..=4u8);
        let cells = (0..h * w).map(|_| Color::of(rng.gen_range(0..palette))).collect();
        let g = Grid::new(h, w, cells).unwrap();
        let bg = if i % 5 == 0 { Color::of(1) } else { Color::BACKGROUND };
        for conn in [Connectivity::Four, Connectivity::Eight] {
            for kind in [ExtractionKind::SameColor, ExtractionKind::AnyForeground] {
                let mode = ExtractionMode { kind, background: bg };
                let got: Vec<Vec<(usize, usize, u8)>> = find_connected_objects(&g, conn, mode)
                    .iter()
                    .map(|o| {
                        let mut cells: Vec<_> =
                            o.cells().iter().map(|c| (c.row as usize, c.col as usize, c.color.value())).collect();
                        cells.sort();
                        cells
                    })
                    .collect();
                let want = oracle(&g, conn == Connectivity::Eight, kind == ExtractionKind::SameColor, bg);
                if got != want {
                    mismatches += 1;
                }
            }
        }
    }
    assert_eq!(mismatches, 0);
}
