//! The fixed primitive table: names, signatures and implementations.

use std::cmp::Reverse;

use super::{Direction, DslError, Literal, SortKey, Type, Value};
use crate::grid::{Color, Grid, MAX_DIM};
use crate::objects::{self, ExtractionMode, GridObject, ObjectPredicate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Rotate,
    Reflect,
    Crop,
    Paint,
    Overlay,
    Canvas,
    Gravity,
    Stack,
    RecolorMap,
    Height,
    Width,
    Objects,
    Blobs,
    Translate,
    Recolor,
    Largest,
    First,
    SortObjectsBy,
    CountObjects,
    Size,
    ObjColor,
    BBoxHeight,
    BBoxWidth,
    Eq,
    And,
    If,
}

pub(super) enum Signature {
    Fixed(&'static [Type], Type),
    /// `eq`: two arguments of the same scalar type.
    SameScalar,
    /// `if`: Bool condition and two branches of one type.
    Conditional,
    /// `recolor_map`: a grid followed by one or more `(from, to)` color pairs.
    ColorPairs,
}

use Type as T;

impl Prim {
    pub const ALL: [Prim; 26] = [
        Prim::Rotate,
        Prim::Reflect,
        Prim::Crop,
        Prim::Paint,
        Prim::Overlay,
        Prim::Canvas,
        Prim::Gravity,
        Prim::Stack,
        Prim::RecolorMap,
        Prim::Height,
        Prim::Width,
        Prim::Objects,
        Prim::Blobs,
        Prim::Translate,
        Prim::Recolor,
        Prim::Largest,
        Prim::First,
        Prim::SortObjectsBy,
        Prim::CountObjects,
        Prim::Size,
        Prim::ObjColor,
        Prim::BBoxHeight,
        Prim::BBoxWidth,
        Prim::Eq,
        Prim::And,
        Prim::If,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Prim::Rotate => "rotate",
            Prim::Reflect => "reflect",
            Prim::Crop => "crop",
            Prim::Paint => "paint",
            Prim::Overlay => "overlay",
            Prim::Canvas => "canvas",
            Prim::Gravity => "gravity",
            Prim::Stack => "stack",
            Prim::RecolorMap => "recolor_map",
            Prim::Height => "height",
            Prim::Width => "width",
            Prim::Objects => "objects",
            Prim::Blobs => "blobs",
            Prim::Translate => "translate",
            Prim::Recolor => "recolor",
            Prim::Largest => "largest",
            Prim::First => "first",
            Prim::SortObjectsBy => "sort_objects_by",
            Prim::CountObjects => "count_objects",
            Prim::Size => "size",
            Prim::ObjColor => "color",
            Prim::BBoxHeight => "bbox_height",
            Prim::BBoxWidth => "bbox_width",
            Prim::Eq => "eq",
            Prim::And => "and",
            Prim::If => "if",
        }
    }

    pub fn from_name(name: &str) -> Option<Prim> {
        Prim::ALL.into_iter().find(|p| p.name() == name)
    }

    pub(super) fn signature(self) -> Signature {
        use Signature::Fixed;
        match self {
            Prim::Rotate => Fixed(&[T::Grid, T::Int], T::Grid),
            Prim::Reflect => Fixed(&[T::Grid, T::Axis], T::Grid),
            Prim::Crop => Fixed(&[T::Grid, T::Object], T::Grid),
            Prim::Paint => Fixed(&[T::Grid, T::Object, T::Color], T::Grid),
            Prim::Overlay => Fixed(&[T::Grid, T::Object], T::Grid),
            Prim::Canvas => Fixed(&[T::Int, T::Int, T::Color], T::Grid),
            Prim::Gravity => Fixed(&[T::Grid, T::Direction, T::Color], T::Grid),
            Prim::Stack => Fixed(&[T::Objects, T::Grid, T::Direction, T::Direction], T::Grid),
            Prim::RecolorMap => Signature::ColorPairs,
            Prim::Height | Prim::Width => Fixed(&[T::Grid], T::Int),
            Prim::Objects | Prim::Blobs => Fixed(&[T::Grid, T::Connectivity, T::Color], T::Objects),
            Prim::Translate => Fixed(&[T::Object, T::Int, T::Int], T::Object),
            Prim::Recolor => Fixed(&[T::Object, T::Color], T::Object),
            Prim::Largest => Fixed(&[T::Objects], T::Objects),
            Prim::First => Fixed(&[T::Objects], T::Object),
            Prim::SortObjectsBy => Fixed(&[T::Objects, T::SortKey, T::Bool], T::Objects),
            Prim::CountObjects => Fixed(&[T::Objects], T::Int),
            Prim::Size | Prim::BBoxHeight | Prim::BBoxWidth => Fixed(&[T::Object], T::Int),
            Prim::ObjColor => Fixed(&[T::Object], T::Color),
            Prim::Eq => Signature::SameScalar,
            Prim::And => Fixed(&[T::Bool, T::Bool], T::Bool),
            Prim::If => Signature::Conditional,
        }
    }

    /// Applies the primitive to evaluated arguments. Arguments are assumed
    /// to have passed the typechecker; `If` is handled by the evaluator.
    pub(super) fn apply(self, args: Vec<Value>) -> Result<Value, DslError> {
        let mut args = args.into_iter();
        let mut next = || args.next().expect("arity checked");
        let out = match self {
            Prim::Rotate => {
                let g = grid(next());
                let turns = int(next());
                Value::Grid(objects::rotate(&g, turns).map_err(|e| invalid(self, e.to_string()))?)
            }
            Prim::Reflect => {
                let g = grid(next());
                Value::Grid(objects::reflect(&g, axis(next())))
            }
            Prim::Crop => {
                let g = grid(next());
                Value::Grid(objects::crop_to_bbox(&g, &object(next()))?)
            }
            Prim::Paint => {
                let g = grid(next());
                let o = object(next());
                Value::Grid(objects::paint(&g, &o, color(next()))?)
            }
            Prim::Overlay => {
                let g = grid(next());
                Value::Grid(objects::overlay(&g, &object(next()))?)
            }
            Prim::Canvas => {
                let h = int(next());
                let w = int(next());
                let c = color(next());
                if h <= 0 || w <= 0 {
                    return Err(DslError::DegenerateResult(format!("canvas {h}x{w}")));
                }
                if h > MAX_DIM as i64 || w > MAX_DIM as i64 {
                    return Err(invalid(self, format!("canvas {h}x{w} exceeds {MAX_DIM}")));
                }
                Value::Grid(Grid::filled(h as usize, w as usize, c).expect("dimensions checked"))
            }
            Prim::Gravity => {
                let g = grid(next());
                let d = direction(next());
                Value::Grid(gravity(&g, d, color(next())))
            }
            Prim::Stack => {
                let objs = objects_of(next());
                let canvas = grid(next());
                let d = direction(next());
                let align = direction(next());
                Value::Grid(stack(&objs, &canvas, d, align)?)
            }
            Prim::RecolorMap => {
                let g = grid(next());
                let rest: Vec<Color> = args.map(color).collect();
                let mut table: [Color; 10] = std::array::from_fn(|i| Color::of(i as u8));
                for pair in rest.chunks(2) {
                    table[pair[0].value() as usize] = pair[1];
                }
                let cells = g.cells().iter().map(|c| table[c.value() as usize]).collect();
                Value::Grid(Grid::new(g.height(), g.width(), cells).expect("same shape"))
            }
            Prim::Height => Value::Lit(Literal::Int(grid(next()).height() as i64)),
            Prim::Width => Value::Lit(Literal::Int(grid(next()).width() as i64)),
            Prim::Objects | Prim::Blobs => {
                let g = grid(next());
                let conn = match next() {
                    Value::Lit(Literal::Connectivity(c)) => c,
                    v => unreachable!("typechecked: {v:?}"),
                };
                let bg = color(next());
                let mode = if self == Prim::Objects {
                    ExtractionMode::same_color()
                } else {
                    ExtractionMode::any_foreground()
                };
                Value::Objects(objects::find_connected_objects(&g, conn, mode.with_background(bg)))
            }
            Prim::Translate => {
                let o = object(next());
                let dr = int(next());
                let dc = int(next());
                let offset = |v: i64| {
                    i32::try_from(v)
                        .ok()
                        .filter(|v| v.abs() <= 1 << 16)
                        .ok_or_else(|| invalid(self, format!("offset {v} too large")))
                };
                Value::Object(objects::translate(&o, offset(dr)?, offset(dc)?))
            }
            Prim::Recolor => {
                let o = object(next());
                Value::Object(o.recolored(color(next())))
            }
            Prim::Largest => Value::Objects(objects::filter_objects(&objects_of(next()), ObjectPredicate::SizeLargest)),
            Prim::First => match objects_of(next()).into_iter().next() {
                Some(o) => Value::Object(o),
                None => return Err(DslError::DegenerateResult("first of an empty object list".into())),
            },
            Prim::SortObjectsBy => {
                let mut objs = objects_of(next());
                let key = match next() {
                    Value::Lit(Literal::SortKey(k)) => k,
                    v => unreachable!("typechecked: {v:?}"),
                };
                let descending = boolean(next());
                let key_of = |o: &GridObject| -> i64 {
                    match key {
                        SortKey::Size => o.size() as i64,
                        SortKey::Row => i64::from(o.bbox().top),
                        SortKey::Col => i64::from(o.bbox().left),
                        SortKey::Color => i64::from(objects::object_features(o).dominant_color.value()),
                    }
                };
                if descending {
                    objs.sort_by_key(|o| Reverse(key_of(o)));
                } else {
                    objs.sort_by_key(key_of);
                }
                Value::Objects(objs)
            }
            Prim::CountObjects => Value::Lit(Literal::Int(objects_of(next()).len() as i64)),
            Prim::Size => Value::Lit(Literal::Int(object(next()).size() as i64)),
            Prim::ObjColor => Value::Lit(Literal::Color(objects::object_features(&object(next())).dominant_color)),
            Prim::BBoxHeight => Value::Lit(Literal::Int(object(next()).bbox().height() as i64)),
            Prim::BBoxWidth => Value::Lit(Literal::Int(object(next()).bbox().width() as i64)),
            Prim::Eq => {
                let a = next();
                Value::Lit(Literal::Bool(a == next()))
            }
            Prim::And => {
                let a = boolean(next());
                Value::Lit(Literal::Bool(a && boolean(next())))
            }
            Prim::If => unreachable!("if is evaluated lazily"),
        };
        Ok(out)
    }
}

fn invalid(prim: Prim, message: String) -> DslError {
    DslError::InvalidArgument { prim: prim.name(), message }
}

fn grid(v: Value) -> Grid {
    match v {
        Value::Grid(g) => g,
        v => unreachable!("typechecked: {v:?}"),
    }
}

fn object(v: Value) -> GridObject {
    match v {
        Value::Object(o) => o,
        v => unreachable!("typechecked: {v:?}"),
    }
}

fn objects_of(v: Value) -> Vec<GridObject> {
    match v {
        Value::Objects(o) => o,
        v => unreachable!("typechecked: {v:?}"),
    }
}

fn int(v: Value) -> i64 {
    match v {
        Value::Lit(Literal::Int(i)) => i,
        v => unreachable!("typechecked: {v:?}"),
    }
}

fn color(v: Value) -> Color {
    match v {
        Value::Lit(Literal::Color(c)) => c,
        v => unreachable!("typechecked: {v:?}"),
    }
}

fn boolean(v: Value) -> bool {
    match v {
        Value::Lit(Literal::Bool(b)) => b,
        v => unreachable!("typechecked: {v:?}"),
    }
}

fn axis(v: Value) -> crate::objects::Axis {
    match v {
        Value::Lit(Literal::Axis(a)) => a,
        v => unreachable!("typechecked: {v:?}"),
    }
}

fn direction(v: Value) -> Direction {
    match v {
        Value::Lit(Literal::Direction(d)) => d,
        v => unreachable!("typechecked: {v:?}"),
    }
}

/// Slides every non-background cell toward `dir`, keeping the order of
/// cells within each column (or row).
pub fn gravity(g: &Grid, dir: Direction, background: Color) -> Grid {
    let (h, w) = (g.height(), g.width());
    let mut out = Grid::filled(h, w, background).expect("same dimensions");
    let vertical = dir.is_vertical();
    let (lines, len) = if vertical { (w, h) } else { (h, w) };
    for line in 0..lines {
        let at = |i: usize| if vertical { (i, line) } else { (line, i) };
        let cells: Vec<Color> = (0..len)
            .map(|i| {
                let (r, c) = at(i);
                g.get(r, c)
            })
            .filter(|&c| c != background)
            .collect();
        let toward_start = matches!(dir, Direction::Top | Direction::Left);
        let offset = if toward_start { 0 } else { len - cells.len() };
        for (k, &color) in cells.iter().enumerate() {
            let (r, c) = at(offset + k);
            out.set(r, c, color);
        }
    }
    out
}

/// Packs objects against the `dir` edge of `canvas` in list order, each
/// flush against the previous one, and aligned to the `align` edge.
pub fn stack(objs: &[GridObject], canvas: &Grid, dir: Direction, align: Direction) -> Result<Grid, DslError> {
    if dir.is_vertical() == align.is_vertical() {
        return Err(invalid(
            Prim::Stack,
            format!("alignment {} is not perpendicular to {}", align.name(), dir.name()),
        ));
    }
    let (h, w) = (canvas.height() as i32, canvas.width() as i32);
    let mut out = canvas.clone();
    let mut cursor = match dir {
        Direction::Top | Direction::Left => 0,
        Direction::Bottom => h,
        Direction::Right => w,
    };
    for obj in objs {
        let norm = obj.normalized();
        let (oh, ow) = (norm.bbox().height() as i32, norm.bbox().width() as i32);
        let cross = |extent: i32, total: i32| match align {
            Direction::Top | Direction::Left => 0,
            Direction::Bottom | Direction::Right => total - extent,
        };
        let (row, col) = match dir {
            Direction::Top => {
                cursor += oh;
                (cursor - oh, cross(ow, w))
            }
            Direction::Bottom => {
                cursor -= oh;
                (cursor, cross(ow, w))
            }
            Direction::Left => {
                cursor += ow;
                (cross(oh, h), cursor - ow)
            }
            Direction::Right => {
                cursor -= ow;
                (cross(oh, h), cursor)
            }
        };
        out = objects::overlay(&out, &objects::translate(&norm, row, col))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::Cell;

    fn g(rows: &[&[i64]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    fn seg(len: i32, color: u8) -> GridObject {
        GridObject::new((0..len).map(|c| Cell { row: 0, col: c, color: Color::of(color) })).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for p in Prim::ALL {
            assert_eq!(Prim::from_name(p.name()), Some(p));
        }
        assert_eq!(Prim::from_name("nope"), None);
    }

    #[test]
    fn gravity_each_direction() {
        let grid = g(&[&[1, 0, 0], &[0, 2, 0], &[3, 0, 0]]);
        let bg = Color::BACKGROUND;
        assert_eq!(gravity(&grid, Direction::Bottom, bg), g(&[&[0, 0, 0], &[1, 0, 0], &[3, 2, 0]]));
        assert_eq!(gravity(&grid, Direction::Top, bg), g(&[&[1, 2, 0], &[3, 0, 0], &[0, 0, 0]]));
        assert_eq!(gravity(&grid, Direction::Right, bg), g(&[&[0, 0, 1], &[0, 0, 2], &[0, 0, 3]]));
        assert_eq!(gravity(&grid, Direction::Left, bg), g(&[&[1, 0, 0], &[2, 0, 0], &[3, 0, 0]]));
    }

    #[test]
    fn stack_bottom_right() {
        let canvas = Grid::filled(4, 4, Color::BACKGROUND).unwrap();
        let out = stack(&[seg(3, 1), seg(1, 2)], &canvas, Direction::Bottom, Direction::Right).unwrap();
        assert_eq!(out, g(&[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 2], &[0, 1, 1, 1]]));
        let out = stack(&[seg(3, 1), seg(1, 2)], &canvas, Direction::Top, Direction::Left).unwrap();
        assert_eq!(out, g(&[&[1, 1, 1, 0], &[2, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0]]));
    }

    #[test]
    fn stack_rejects_parallel_alignment_and_overflow() {
        let canvas = Grid::filled(1, 4, Color::BACKGROUND).unwrap();
        assert!(matches!(
            stack(&[seg(1, 1)], &canvas, Direction::Top, Direction::Bottom),
            Err(DslError::InvalidArgument { .. })
        ));
        assert!(matches!(
            stack(&[seg(1, 1), seg(1, 1)], &canvas, Direction::Top, Direction::Left),
            Err(DslError::OutOfBounds(_))
        ));
    }
}
