//! Object-centric grid primitives.
//!
//! Connected-component extraction plus the geometric and compositional
//! operations the transformation DSL is built on. Rotation is clockwise.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::grid::{Color, Grid};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObjectError {
    #[error("cell ({row}, {col}) outside {height}x{width} grid")]
    OutOfBounds { row: i32, col: i32, height: usize, width: usize },
    #[error("quarter turns must be in 0..=3, got {0}")]
    InvalidRotation(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn offsets(self) -> &'static [(i32, i32)] {
        const FOUR: [(i32, i32); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(i32, i32); 8] =
            [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Connectivity::Four => "four",
            Connectivity::Eight => "eight",
        }
    }
}

/// Reflection axis. `Horizontal` mirrors across the horizontal midline
/// (top and bottom swap); `Vertical` mirrors across the vertical midline
/// (left and right swap).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Horizontal => "horizontal",
            Axis::Vertical => "vertical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtractionKind {
    /// Components are single-colored.
    SameColor,
    /// Any non-background cells join a component regardless of color.
    AnyForeground,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtractionMode {
    pub kind: ExtractionKind,
    pub background: Color,
}

impl ExtractionMode {
    pub fn same_color() -> Self {
        ExtractionMode { kind: ExtractionKind::SameColor, background: Color::BACKGROUND }
    }

    pub fn any_foreground() -> Self {
        ExtractionMode { kind: ExtractionKind::AnyForeground, background: Color::BACKGROUND }
    }

    pub fn with_background(self, background: Color) -> Self {
        ExtractionMode { background, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub row: i32,
    pub col: i32,
    pub color: Color,
}

/// Inclusive bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BBox {
    pub top: i32,
    pub left: i32,
    pub bottom: i32,
    pub right: i32,
}

impl BBox {
    pub fn height(&self) -> usize {
        (self.bottom - self.top + 1) as usize
    }

    pub fn width(&self) -> usize {
        (self.right - self.left + 1) as usize
    }
}

/// A non-empty set of colored cells with its tight bounding box.
///
/// Cells are kept sorted row-major and unique by position.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridObject {
    cells: Vec<Cell>,
    bbox: BBox,
}

impl GridObject {
    /// Returns `None` for an empty cell set. Later duplicates of a position win.
    pub fn new(cells: impl IntoIterator<Item = Cell>) -> Option<GridObject> {
        let by_pos: BTreeMap<(i32, i32), Color> =
            cells.into_iter().map(|c| ((c.row, c.col), c.color)).collect();
        let cells: Vec<Cell> =
            by_pos.into_iter().map(|((row, col), color)| Cell { row, col, color }).collect();
        let first = cells.first()?;
        let mut bbox = BBox { top: first.row, left: first.col, bottom: first.row, right: first.col };
        for c in &cells {
            bbox.top = bbox.top.min(c.row);
            bbox.bottom = bbox.bottom.max(c.row);
            bbox.left = bbox.left.min(c.col);
            bbox.right = bbox.right.max(c.col);
        }
        Some(GridObject { cells, bbox })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }

    pub fn colors(&self) -> impl Iterator<Item = Color> + '_ {
        self.cells.iter().map(|c| c.color)
    }

    pub fn recolored(&self, color: Color) -> GridObject {
        GridObject {
            cells: self.cells.iter().map(|c| Cell { color, ..*c }).collect(),
            bbox: self.bbox,
        }
    }

    /// Moves the object so its bounding box starts at `(0, 0)`.
    pub fn normalized(&self) -> GridObject {
        translate(self, -self.bbox.top, -self.bbox.left)
    }
}

impl fmt::Debug for GridObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridObject")
            .field("size", &self.cells.len())
            .field("bbox", &self.bbox)
            .field("cells", &self.cells.iter().map(|c| (c.row, c.col, c.color.value())).collect::<Vec<_>>())
            .finish()
    }
}

/// Ordered object collection; extraction order is by each object's
/// topmost-then-leftmost cell.
pub type GridObjects = Vec<GridObject>;

/// Extracts connected components of non-background cells.
pub fn find_connected_objects(grid: &Grid, conn: Connectivity, mode: ExtractionMode) -> GridObjects {
    let (h, w) = (grid.height(), grid.width());
    let mut seen = vec![false; h * w];
    let mut objects = Vec::new();
    let mut queue = VecDeque::new();
    for (r, c, color) in grid.iter() {
        if color == mode.background || seen[r * w + c] {
            continue;
        }
        seen[r * w + c] = true;
        queue.push_back((r as i32, c as i32));
        let mut cells = Vec::new();
        while let Some((cr, cc)) = queue.pop_front() {
            let here = grid.get(cr as usize, cc as usize);
            cells.push(Cell { row: cr, col: cc, color: here });
            for &(dr, dc) in conn.offsets() {
                let (nr, nc) = (cr + dr, cc + dc);
                let Some(next) = grid.get_signed(nr, nc) else { continue };
                let idx = nr as usize * w + nc as usize;
                if seen[idx] || next == mode.background {
                    continue;
                }
                if mode.kind == ExtractionKind::SameColor && next != color {
                    continue;
                }
                seen[idx] = true;
                queue.push_back((nr, nc));
            }
        }
        objects.push(GridObject::new(cells).expect("component has its seed cell"));
    }
    objects
}

/// Shifts every cell; the result may lie outside any grid.
pub fn translate(object: &GridObject, dr: i32, dc: i32) -> GridObject {
    GridObject {
        cells: object
            .cells
            .iter()
            .map(|c| Cell { row: c.row + dr, col: c.col + dc, color: c.color })
            .collect(),
        bbox: BBox {
            top: object.bbox.top + dr,
            left: object.bbox.left + dc,
            bottom: object.bbox.bottom + dr,
            right: object.bbox.right + dc,
        },
    }
}

/// Rotates clockwise by `quarter_turns` (0..=3).
pub fn rotate(grid: &Grid, quarter_turns: i64) -> Result<Grid, ObjectError> {
    if !(0..=3).contains(&quarter_turns) {
        return Err(ObjectError::InvalidRotation(quarter_turns));
    }
    let mut out = grid.clone();
    for _ in 0..quarter_turns {
        out = rotate_once(&out);
    }
    Ok(out)
}

fn rotate_once(grid: &Grid) -> Grid {
    let (h, w) = (grid.height(), grid.width());
    let mut cells = Vec::with_capacity(h * w);
    for r in 0..w {
        for c in 0..h {
            cells.push(grid.get(h - 1 - c, r));
        }
    }
    Grid::new(w, h, cells).expect("rotation preserves valid dimensions")
}

pub fn reflect(grid: &Grid, axis: Axis) -> Grid {
    let (h, w) = (grid.height(), grid.width());
    let mut out = grid.clone();
    for (r, c, color) in grid.iter() {
        match axis {
            Axis::Horizontal => out.set(h - 1 - r, c, color),
            Axis::Vertical => out.set(r, w - 1 - c, color),
        }
    }
    out
}

/// The sub-grid of `grid` under the object's bounding box.
pub fn crop_to_bbox(grid: &Grid, object: &GridObject) -> Result<Grid, ObjectError> {
    let b = object.bbox;
    for (row, col) in [(b.top, b.left), (b.bottom, b.right)] {
        if !grid.contains(row, col) {
            return Err(out_of_bounds(grid, row, col));
        }
    }
    let mut cells = Vec::with_capacity(b.height() * b.width());
    for r in b.top..=b.bottom {
        for c in b.left..=b.right {
            cells.push(grid.get(r as usize, c as usize));
        }
    }
    Ok(Grid::new(b.height(), b.width(), cells).expect("crop of a valid grid is valid"))
}

/// Recolors exactly the object's cells in `grid` to `color`.
pub fn paint(grid: &Grid, object: &GridObject, color: Color) -> Result<Grid, ObjectError> {
    overlay(grid, &object.recolored(color))
}

/// Writes the object's own colors over `base`.
pub fn overlay(base: &Grid, object: &GridObject) -> Result<Grid, ObjectError> {
    let mut out = base.clone();
    for c in &object.cells {
        if !base.contains(c.row, c.col) {
            return Err(out_of_bounds(base, c.row, c.col));
        }
        out.set(c.row as usize, c.col as usize, c.color);
    }
    Ok(out)
}

fn out_of_bounds(grid: &Grid, row: i32, col: i32) -> ObjectError {
    ObjectError::OutOfBounds { row, col, height: grid.height(), width: grid.width() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectPredicate {
    SizeEquals(usize),
    SizeLargest,
    SizeSmallest,
    ColorEquals(Color),
    BBoxDims(usize, usize),
}

/// Order-preserving filter. Largest/smallest keep every tied object.
pub fn filter_objects(objects: &[GridObject], pred: ObjectPredicate) -> GridObjects {
    let extreme = match pred {
        ObjectPredicate::SizeLargest => objects.iter().map(GridObject::size).max(),
        ObjectPredicate::SizeSmallest => objects.iter().map(GridObject::size).min(),
        _ => None,
    };
    objects
        .iter()
        .filter(|o| match pred {
            ObjectPredicate::SizeEquals(n) => o.size() == n,
            ObjectPredicate::SizeLargest | ObjectPredicate::SizeSmallest => Some(o.size()) == extreme,
            ObjectPredicate::ColorEquals(c) => o.colors().all(|x| x == c),
            ObjectPredicate::BBoxDims(h, w) => o.bbox.height() == h && o.bbox.width() == w,
        })
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectFeatures {
    /// Bounding-box midpoint `(row, col)`; always a multiple of one half.
    pub center: (f64, f64),
    pub area: usize,
    pub dominant_color: Color,
}

pub fn object_features(object: &GridObject) -> ObjectFeatures {
    let b = object.bbox;
    ObjectFeatures {
        center: (f64::from(b.top + b.bottom) / 2.0, f64::from(b.left + b.right) / 2.0),
        area: object.size(),
        dominant_color: dominant_color(object.colors()).expect("objects are non-empty"),
    }
}

/// Most frequent color; ties go to the smaller color value.
pub fn dominant_color(colors: impl IntoIterator<Item = Color>) -> Option<Color> {
    let mut counts = [0usize; 10];
    for c in colors {
        counts[c.value() as usize] += 1;
    }
    let best = counts.iter().enumerate().filter(|(_, &n)| n > 0).max_by(|a, b| {
        a.1.cmp(b.1).then(b.0.cmp(&a.0))
    })?;
    Color::new(best.0 as u8)
}
