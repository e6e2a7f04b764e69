//! A small first-order language for grid transformations.
//!
//! Programs are terms over a fixed primitive table. There is no recursion
//! and iteration only runs over finite object collections, so evaluation of
//! a typechecked program always terminates. Programs may mention free
//! variables (task variables); [`partial_eval`] inlines them to produce a
//! closed witness that depends only on the input grid.
//!
//! Text form is a parenthesized prefix notation:
//!
//! ```text
//! (fold_overlay
//!   (map o (largest (objects (input) four #0)) (recolor $o $target))
//!   (input))
//! ```
//!
//! Variables are written `$name`, colors `#n`, integers in decimal, and the
//! remaining literals as bare keywords (`top`, `horizontal`, `four`,
//! `true`, `by_size`, ...).

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::grid::{Color, Grid};
use crate::objects::{Axis, Connectivity, GridObject, ObjectError};

mod check;
mod eval;
mod partial;
mod prims;
mod syntax;

pub use check::{check_program, free_vars, type_env, typecheck, TypeAssignment, TypeEnv};
pub use eval::{eval, eval_term};
pub use partial::partial_eval;
pub use prims::{gravity, Prim};
pub use syntax::{parse_source, render_source};

/// Version of the primitive table and text syntax.
pub const DSL_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("type error at {location}: expected {expected}, found {found}")]
    Type { location: String, expected: String, found: String },
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("out of bounds: {0}")]
    OutOfBounds(ObjectError),
    #[error("degenerate result: {0}")]
    DegenerateResult(String),
    #[error("invalid argument to `{prim}`: {message}")]
    InvalidArgument { prim: &'static str, message: String },
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
}

impl From<ObjectError> for DslError {
    fn from(e: ObjectError) -> Self {
        DslError::OutOfBounds(e)
    }
}

/// Grid edge; used as a gravity/stacking direction and as an alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Top,
    Bottom,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Top, Direction::Bottom, Direction::Left, Direction::Right];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Top => "top",
            Direction::Bottom => "bottom",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Direction::Top | Direction::Bottom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SortKey {
    Size,
    Row,
    Col,
    Color,
}

impl SortKey {
    pub fn name(self) -> &'static str {
        match self {
            SortKey::Size => "by_size",
            SortKey::Row => "by_row",
            SortKey::Col => "by_col",
            SortKey::Color => "by_color",
        }
    }
}

/// A task-variable value. Grids are never task variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Int(i64),
    Color(Color),
    Direction(Direction),
    Axis(Axis),
}

impl Scalar {
    pub fn ty(&self) -> Type {
        match self {
            Scalar::Int(_) => Type::Int,
            Scalar::Color(_) => Type::Color,
            Scalar::Direction(_) => Type::Direction,
            Scalar::Axis(_) => Type::Axis,
        }
    }

    /// Parses the literal spelling produced by `Display`.
    pub fn parse(text: &str) -> Option<Scalar> {
        match Literal::parse(text)? {
            Literal::Int(v) => Some(Scalar::Int(v)),
            Literal::Color(c) => Some(Scalar::Color(c)),
            Literal::Direction(d) => Some(Scalar::Direction(d)),
            Literal::Axis(a) => Some(Scalar::Axis(a)),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Literal::from(*self).fmt(f)
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Int(v) => serializer.serialize_i64(*v),
            other => serializer.collect_str(other),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(v) => Ok(Scalar::Int(v)),
            Repr::Text(s) => Scalar::parse(&s)
                .ok_or_else(|| serde::de::Error::custom(format!("not a scalar literal: {s}"))),
        }
    }
}

/// Bindings from task-variable names to scalars.
pub type Env = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    Int(i64),
    Color(Color),
    Bool(bool),
    Direction(Direction),
    Axis(Axis),
    Connectivity(Connectivity),
    SortKey(SortKey),
}

impl Literal {
    pub fn ty(&self) -> Type {
        match self {
            Literal::Int(_) => Type::Int,
            Literal::Color(_) => Type::Color,
            Literal::Bool(_) => Type::Bool,
            Literal::Direction(_) => Type::Direction,
            Literal::Axis(_) => Type::Axis,
            Literal::Connectivity(_) => Type::Connectivity,
            Literal::SortKey(_) => Type::SortKey,
        }
    }

    pub fn parse(text: &str) -> Option<Literal> {
        if let Some(rest) = text.strip_prefix('#') {
            let v: u8 = rest.parse().ok()?;
            return Color::new(v).map(Literal::Color);
        }
        let lit = match text {
            "true" => Literal::Bool(true),
            "false" => Literal::Bool(false),
            "top" => Literal::Direction(Direction::Top),
            "bottom" => Literal::Direction(Direction::Bottom),
            "left" => Literal::Direction(Direction::Left),
            "right" => Literal::Direction(Direction::Right),
            "horizontal" => Literal::Axis(Axis::Horizontal),
            "vertical" => Literal::Axis(Axis::Vertical),
            "four" => Literal::Connectivity(Connectivity::Four),
            "eight" => Literal::Connectivity(Connectivity::Eight),
            "by_size" => Literal::SortKey(SortKey::Size),
            "by_row" => Literal::SortKey(SortKey::Row),
            "by_col" => Literal::SortKey(SortKey::Col),
            "by_color" => Literal::SortKey(SortKey::Color),
            _ => {
                let digits = text.strip_prefix('-').unwrap_or(text);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                Literal::Int(text.parse().ok()?)
            }
        };
        Some(lit)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Color(c) => write!(f, "#{}", c.value()),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Direction(d) => f.write_str(d.name()),
            Literal::Axis(a) => f.write_str(a.name()),
            Literal::Connectivity(c) => f.write_str(c.name()),
            Literal::SortKey(k) => f.write_str(k.name()),
        }
    }
}

impl From<Scalar> for Literal {
    fn from(s: Scalar) -> Self {
        match s {
            Scalar::Int(v) => Literal::Int(v),
            Scalar::Color(c) => Literal::Color(c),
            Scalar::Direction(d) => Literal::Direction(d),
            Scalar::Axis(a) => Literal::Axis(a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Grid,
    Object,
    Objects,
    Int,
    Color,
    Bool,
    Direction,
    Axis,
    Connectivity,
    SortKey,
}

impl Type {
    pub fn is_scalar(self) -> bool {
        !matches!(self, Type::Grid | Type::Object | Type::Objects)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Type::Grid => "Grid",
            Type::Object => "Object",
            Type::Objects => "Objects",
            Type::Int => "Int",
            Type::Color => "Color",
            Type::Bool => "Bool",
            Type::Direction => "Direction",
            Type::Axis => "Axis",
            Type::Connectivity => "Connectivity",
            Type::SortKey => "SortKey",
        };
        f.write_str(s)
    }
}

/// Runtime values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Grid(Grid),
    Object(GridObject),
    Objects(Vec<GridObject>),
    Lit(Literal),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Grid(_) => Type::Grid,
            Value::Object(_) => Type::Object,
            Value::Objects(_) => Type::Objects,
            Value::Lit(l) => l.ty(),
        }
    }
}

/// Program term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    /// The grid the program is applied to.
    Input,
    Var(String),
    Lit(Literal),
    Prim(Prim, Vec<Term>),
    Let { name: String, bound: Box<Term>, body: Box<Term> },
    /// Applies `body` (an Object-valued term over `binder`) to each object.
    Map { binder: String, source: Box<Term>, body: Box<Term> },
    /// Keeps the objects for which `predicate` (Bool over `binder`) holds.
    Filter { binder: String, source: Box<Term>, predicate: Box<Term> },
    /// Overlays each object, in order, onto the canvas grid.
    FoldOverlay { objects: Box<Term>, canvas: Box<Term> },
}

/// Short constructors used by generator definitions and tests.
pub mod build {
    use super::*;

    pub fn input() -> Term {
        Term::Input
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(v: i64) -> Term {
        Term::Lit(Literal::Int(v))
    }

    pub fn color(v: u8) -> Term {
        Term::Lit(Literal::Color(Color::of(v)))
    }

    pub fn lit(l: Literal) -> Term {
        Term::Lit(l)
    }

    pub fn prim(p: Prim, args: Vec<Term>) -> Term {
        Term::Prim(p, args)
    }

    pub fn let_(name: &str, bound: Term, body: Term) -> Term {
        Term::Let { name: name.into(), bound: Box::new(bound), body: Box::new(body) }
    }

    pub fn map(binder: &str, source: Term, body: Term) -> Term {
        Term::Map { binder: binder.into(), source: Box::new(source), body: Box::new(body) }
    }

    pub fn filter(binder: &str, source: Term, predicate: Term) -> Term {
        Term::Filter { binder: binder.into(), source: Box::new(source), predicate: Box::new(predicate) }
    }

    pub fn fold_overlay(objects: Term, canvas: Term) -> Term {
        Term::FoldOverlay { objects: Box::new(objects), canvas: Box::new(canvas) }
    }
}

impl Term {
    /// Direct children in evaluation order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Input | Term::Var(_) | Term::Lit(_) => vec![],
            Term::Prim(_, args) => args.iter().collect(),
            Term::Let { bound, body, .. } => vec![bound, body],
            Term::Map { source, body, .. } => vec![source, body],
            Term::Filter { source, predicate, .. } => vec![source, predicate],
            Term::FoldOverlay { objects, canvas } => vec![objects, canvas],
        }
    }

    /// Number of nodes in the term tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Term::size).sum::<usize>()
    }

    /// Every primitive used anywhere in the term.
    pub fn primitives(&self) -> Vec<Prim> {
        let mut out = Vec::new();
        self.collect_prims(&mut out);
        out
    }

    fn collect_prims(&self, out: &mut Vec<Prim>) {
        if let Term::Prim(p, _) = self {
            out.push(*p);
        }
        for c in self.children() {
            c.collect_prims(out);
        }
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
