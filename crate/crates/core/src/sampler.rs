//! Generation-time randomness: the engine's seeded stream and the input
//! library helpers (rejection retry, contiguous object synthesis, placement,
//! palette draws).
//!
//! Nothing here is reachable from the transformation DSL.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{Color, Grid};
use crate::objects::{BBox, Cell, Connectivity, GridObject};

/// Identifier stamped into dataset manifests.
pub const PRNG_ALGORITHM: &str = "chacha8(rand_chacha-0.3)+fnv1a64-stream";

/// Default budget for per-grid helpers.
pub const GRID_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("budget exhausted after {attempts} attempts: {what}")]
    BudgetExhausted { attempts: usize, what: String },
    #[error("palette too small: need {needed} colors, {available} available")]
    InsufficientPalette { needed: usize, available: usize },
    #[error("invalid extent constraint: {0}")]
    InvalidExtent(String),
}

/// Deterministic random stream. Single owner; derive a fresh stream per
/// `(seed, generator id)` for independent work.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> RngStream {
        RngStream { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Stream keyed by a seed and a label (a generator id): the seed picks the
    /// ChaCha key and the label's FNV-1a hash picks the stream number.
    pub fn derive(seed: u64, label: &str) -> RngStream {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a64(label.as_bytes()));
        RngStream { rng }
    }

    pub fn algorithm_id(&self) -> &'static str {
        PRNG_ALGORITHM
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        let span = (hi - lo) as u64;
        lo + self.rng.gen_range(0..=span) as i64
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.rng.gen_range(0..n as u64) as usize
    }

    pub fn chance(&mut self, numerator: u64, denominator: u64) -> bool {
        self.rng.gen_range(0..denominator) < numerator
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        // Fisher-Yates over u64 draws so results do not depend on usize width.
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.gen()
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Draws candidates until one is accepted. The stream is handed to
/// `sample` once per attempt.
pub fn retry<T>(
    rng: &mut RngStream,
    max_attempts: usize,
    mut sample: impl FnMut(&mut RngStream) -> T,
    mut accept: impl FnMut(&T) -> bool,
) -> Result<(T, usize), SampleError> {
    assert!(max_attempts >= 1, "max_attempts must be positive");
    for attempt in 1..=max_attempts {
        let candidate = sample(rng);
        if accept(&candidate) {
            return Ok((candidate, attempt));
        }
    }
    Err(SampleError::BudgetExhausted { attempts: max_attempts, what: "retry".into() })
}

/// Size and bounding-box limits for synthesized objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtentConstraint {
    pub min_size: usize,
    pub max_size: usize,
    pub max_bbox: (usize, usize),
}

impl ExtentConstraint {
    pub fn new(min_size: usize, max_size: usize, max_bbox: (usize, usize)) -> ExtentConstraint {
        ExtentConstraint { min_size, max_size, max_bbox }
    }

    fn validate(&self) -> Result<(), SampleError> {
        let area = self.max_bbox.0 * self.max_bbox.1;
        if self.min_size == 0 || self.min_size > self.max_size {
            return Err(SampleError::InvalidExtent(format!(
                "need 1 <= min_size <= max_size, got {}..={}",
                self.min_size, self.max_size
            )));
        }
        if self.min_size > area {
            return Err(SampleError::InvalidExtent(format!(
                "min_size {} exceeds bbox area {area}",
                self.min_size
            )));
        }
        Ok(())
    }
}

/// Grows a connected single-colored object from a random seed cell by
/// repeatedly adding a uniformly chosen frontier cell. The result is
/// normalized to start at `(0, 0)`.
pub fn synthesize_contiguous_object(
    rng: &mut RngStream,
    conn: Connectivity,
    ext: ExtentConstraint,
    color: Color,
) -> Result<GridObject, SampleError> {
    ext.validate()?;
    let (bh, bw) = (ext.max_bbox.0 as i32, ext.max_bbox.1 as i32);
    let max_size = ext.max_size.min(ext.max_bbox.0 * ext.max_bbox.1);
    let (obj, _) = retry(
        rng,
        GRID_ATTEMPTS,
        |rng| {
            let target = rng.range(ext.min_size as i64, max_size as i64) as usize;
            grow(rng, conn, bh, bw, target)
        },
        |cells| cells.as_ref().is_some_and(|c| c.len() >= ext.min_size),
    )
    .map_err(|_| SampleError::BudgetExhausted {
        attempts: GRID_ATTEMPTS,
        what: format!("object synthesis {ext:?}"),
    })?;
    let cells = obj.expect("accepted");
    let object = GridObject::new(cells.into_iter().map(|(row, col)| Cell { row, col, color }))
        .expect("grown object is non-empty");
    Ok(object.normalized())
}

/// Random growth inside a `bh x bw` box. Returns `None` when the frontier
/// dies out before `target` cells.
fn grow(rng: &mut RngStream, conn: Connectivity, bh: i32, bw: i32, target: usize) -> Option<Vec<(i32, i32)>> {
    let start = (rng.range(0, i64::from(bh - 1)) as i32, rng.range(0, i64::from(bw - 1)) as i32);
    let mut cells = BTreeSet::from([start]);
    let mut frontier = BTreeSet::new();
    let push_neighbors = |frontier: &mut BTreeSet<(i32, i32)>, cells: &BTreeSet<(i32, i32)>, (r, c): (i32, i32)| {
        for &(dr, dc) in conn.offsets() {
            let n = (r + dr, c + dc);
            if n.0 >= 0 && n.0 < bh && n.1 >= 0 && n.1 < bw && !cells.contains(&n) {
                frontier.insert(n);
            }
        }
    };
    push_neighbors(&mut frontier, &cells, start);
    while cells.len() < target {
        if frontier.is_empty() {
            return None;
        }
        let idx = rng.below(frontier.len());
        let next = *frontier.iter().nth(idx).expect("index in range");
        frontier.remove(&next);
        cells.insert(next);
        push_neighbors(&mut frontier, &cells, next);
    }
    Some(cells.into_iter().collect())
}

/// Objects positioned on a canvas, in the order they were given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub grid: Grid,
    pub objects: Vec<GridObject>,
}

/// Places translated copies of `objects` on `canvas` without overlapping
/// each other or existing foreground. With `min_gap > 0`, cells of
/// different objects keep a Chebyshev distance of at least `min_gap + 1`.
pub fn place_objects(
    rng: &mut RngStream,
    canvas: &Grid,
    objects: &[GridObject],
    min_gap: usize,
) -> Result<Placement, SampleError> {
    let (placement, _) = retry(
        rng,
        GRID_ATTEMPTS,
        |rng| try_place(rng, canvas, objects, min_gap),
        Option::is_some,
    )
    .map_err(|_| SampleError::BudgetExhausted {
        attempts: GRID_ATTEMPTS,
        what: format!("placing {} objects on {}x{} canvas", objects.len(), canvas.height(), canvas.width()),
    })?;
    Ok(placement.expect("accepted"))
}

/// Grid-only form of [`place_objects`].
pub fn place_non_overlapping(
    rng: &mut RngStream,
    canvas: &Grid,
    objects: &[GridObject],
    min_gap: usize,
) -> Result<Grid, SampleError> {
    place_objects(rng, canvas, objects, min_gap).map(|p| p.grid)
}

fn try_place(rng: &mut RngStream, canvas: &Grid, objects: &[GridObject], min_gap: usize) -> Option<Placement> {
    let (h, w) = (canvas.height() as i32, canvas.width() as i32);
    let background = Color::BACKGROUND;
    // Which object claims each cell; existing foreground belongs to no object.
    let mut owner: Vec<Option<usize>> = vec![None; canvas.area()];
    let mut grid = canvas.clone();
    let mut placed = Vec::with_capacity(objects.len());
    let reach = min_gap as i32;
    for (idx, obj) in objects.iter().enumerate() {
        let norm = obj.normalized();
        let b: BBox = norm.bbox();
        let (oh, ow) = (b.height() as i32, b.width() as i32);
        if oh > h || ow > w {
            return None;
        }
        let dr = rng.range(0, i64::from(h - oh)) as i32;
        let dc = rng.range(0, i64::from(w - ow)) as i32;
        let moved = crate::objects::translate(&norm, dr, dc);
        for c in moved.cells() {
            if grid.get(c.row as usize, c.col as usize) != background {
                return None;
            }
            for nr in (c.row - reach).max(0)..=(c.row + reach).min(h - 1) {
                for nc in (c.col - reach).max(0)..=(c.col + reach).min(w - 1) {
                    if let Some(other) = owner[(nr * w + nc) as usize] {
                        if other != idx {
                            return None;
                        }
                    }
                }
            }
        }
        for c in moved.cells() {
            owner[(c.row * w + c.col) as usize] = Some(idx);
            grid.set(c.row as usize, c.col as usize, c.color);
        }
        placed.push(moved);
    }
    Some(Placement { grid, objects: placed })
}

/// `k` distinct colors outside `exclude`, in random order.
pub fn random_subset_colors(
    rng: &mut RngStream,
    k: usize,
    exclude: &BTreeSet<Color>,
) -> Result<Vec<Color>, SampleError> {
    let mut pool: Vec<Color> = Color::all().filter(|c| !exclude.contains(c)).collect();
    if k > pool.len() {
        return Err(SampleError::InsufficientPalette { needed: k, available: pool.len() });
    }
    rng.shuffle(&mut pool);
    pool.truncate(k);
    Ok(pool)
}
