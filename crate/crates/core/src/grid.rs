//! Grids, colors, episodes and the canonical ARC-JSON form.
//!
//! A [`Grid`] is a rectangular matrix of color symbols `0..=9` with both
//! dimensions in `1..=30`. Episodes serialize to a canonical ARC-JSON byte
//! string: keys in the order `train`, `test` and `input`, `output`, no
//! whitespace, rows as integer arrays.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest allowed height or width.
pub const MAX_DIM: usize = 30;

/// Display names used by reasoning templates, indexed by color value.
pub const COLOR_NAMES: [&str; 10] = [
    "black", "blue", "red", "green", "yellow", "grey", "magenta", "orange", "cyan", "maroon",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimensions {height}x{width} outside 1..=30")]
    Dimensions { height: usize, width: usize },
    #[error("cell value {0} outside 0..=9")]
    CellValue(i64),
    #[error("expected {expected} cells, got {found}")]
    CellCount { expected: usize, found: usize },
    #[error("row {row} has width {found}, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArcJsonError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("grid bounds violation in {location}: {source}")]
    GridBoundsViolation {
        location: String,
        #[source]
        source: GridError,
    },
    #[error("empty split: {0}")]
    EmptySplit(&'static str),
}

/// A color symbol in `0..=9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct Color(u8);

impl Color {
    pub const BACKGROUND: Color = Color(0);

    pub fn new(value: u8) -> Option<Color> {
        (value <= 9).then_some(Color(value))
    }

    /// Panics when `value > 9`. Meant for literals in code and tests.
    pub const fn of(value: u8) -> Color {
        assert!(value <= 9, "color value out of range");
        Color(value)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn name(self) -> &'static str {
        COLOR_NAMES[self.0 as usize]
    }

    pub fn all() -> impl Iterator<Item = Color> {
        (0..=9).map(Color)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<i64> for Color {
    type Error = GridError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        if (0..=9).contains(&value) {
            Ok(Color(value as u8))
        } else {
            Err(GridError::CellValue(value))
        }
    }
}

/// Row-major rectangular grid of colors.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    height: usize,
    width: usize,
    cells: Vec<Color>,
}

impl Grid {
    pub fn new(height: usize, width: usize, cells: Vec<Color>) -> Result<Grid, GridError> {
        check_dims(height, width)?;
        if cells.len() != height * width {
            return Err(GridError::CellCount { expected: height * width, found: cells.len() });
        }
        Ok(Grid { height, width, cells })
    }

    pub fn filled(height: usize, width: usize, color: Color) -> Result<Grid, GridError> {
        check_dims(height, width)?;
        Ok(Grid { height, width, cells: vec![color; height * width] })
    }

    /// Builds a grid from integer rows, validating shape and palette.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Grid, GridError> {
        let height = rows.len();
        let width = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        check_dims(height, width)?;
        let mut cells = Vec::with_capacity(height * width);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(GridError::Ragged { row: r, expected: width, found: row.len() });
            }
            for &v in row {
                cells.push(Color::try_from(v)?);
            }
        }
        Ok(Grid { height, width, cells })
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.cells
            .chunks(self.width)
            .map(|row| row.iter().map(|c| c.0).collect())
            .collect()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn get(&self, row: usize, col: usize) -> Color {
        self.cells[row * self.width + col]
    }

    /// Bounds-checked access with signed coordinates.
    pub fn get_signed(&self, row: i32, col: i32) -> Option<Color> {
        if self.contains(row, col) {
            Some(self.get(row as usize, col as usize))
        } else {
            None
        }
    }

    pub fn contains(&self, row: i32, col: i32) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn set(&mut self, row: usize, col: usize, color: Color) {
        self.cells[row * self.width + col] = color;
    }

    pub fn cells(&self) -> &[Color] {
        &self.cells
    }

    /// Iterates `(row, col, color)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Color)> + '_ {
        let w = self.width;
        self.cells.iter().enumerate().map(move |(i, &c)| (i / w, i % w, c))
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Grid {}x{}", self.height, self.width)?;
        for row in self.cells.chunks(self.width) {
            for c in row {
                write!(f, "{}", c.0)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(deserializer)?;
        Grid::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

fn check_dims(height: usize, width: usize) -> Result<(), GridError> {
    if (1..=MAX_DIM).contains(&height) && (1..=MAX_DIM).contains(&width) {
        Ok(())
    } else {
        Err(GridError::Dimensions { height, width })
    }
}

/// True iff dimensions and every cell agree.
pub fn grid_equal(a: &Grid, b: &Grid) -> bool {
    a == b
}

/// Cell counts per color. Absent colors are omitted.
pub fn color_histogram(grid: &Grid) -> BTreeMap<Color, usize> {
    let mut hist = BTreeMap::new();
    for &c in grid.cells() {
        *hist.entry(c).or_insert(0) += 1;
    }
    hist
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub input: Grid,
    pub output: Grid,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Episode {
    pub train: Vec<Pair>,
    pub test: Vec<Pair>,
}

/// Which split a pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl Episode {
    /// All pairs tagged with their split and index within the split.
    pub fn pairs(&self) -> impl Iterator<Item = (Split, usize, &Pair)> {
        self.train
            .iter()
            .enumerate()
            .map(|(i, p)| (Split::Train, i, p))
            .chain(self.test.iter().enumerate().map(|(i, p)| (Split::Test, i, p)))
    }

    pub fn grid_count(&self) -> usize {
        2 * (self.train.len() + self.test.len())
    }
}

/// Loosely typed episode document, used where invalid grids must be
/// reported rather than rejected outright.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEpisode {
    pub train: Vec<RawPair>,
    pub test: Vec<RawPair>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPair {
    pub input: Vec<Vec<i64>>,
    pub output: Vec<Vec<i64>>,
}

impl RawEpisode {
    pub fn parse(text: &[u8]) -> Result<RawEpisode, ArcJsonError> {
        serde_json::from_slice(text).map_err(|e| ArcJsonError::MalformedJson(e.to_string()))
    }

    pub fn validate(&self) -> Result<Episode, ArcJsonError> {
        if self.train.is_empty() {
            return Err(ArcJsonError::EmptySplit("train"));
        }
        if self.test.is_empty() {
            return Err(ArcJsonError::EmptySplit("test"));
        }
        let convert = |split: &str, pairs: &[RawPair]| -> Result<Vec<Pair>, ArcJsonError> {
            pairs
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let grid = |role: &str, rows: &[Vec<i64>]| {
                        Grid::from_rows(rows).map_err(|source| ArcJsonError::GridBoundsViolation {
                            location: format!("{split}[{i}].{role}"),
                            source,
                        })
                    };
                    Ok(Pair { input: grid("input", &p.input)?, output: grid("output", &p.output)? })
                })
                .collect()
        };
        Ok(Episode { train: convert("train", &self.train)?, test: convert("test", &self.test)? })
    }
}

/// Parses an ARC-JSON episode document. Unknown keys are ignored.
pub fn parse_arc_json(text: &[u8]) -> Result<Episode, ArcJsonError> {
    RawEpisode::parse(text)?.validate()
}

/// Canonical ARC-JSON bytes for an episode.
pub fn serialize_arc_json(episode: &Episode) -> Vec<u8> {
    serde_json::to_vec(episode).expect("episode serialization is infallible")
}

/// Parses then re-serializes, yielding the canonical form of a document.
pub fn canonicalize_arc_json(text: &[u8]) -> Result<Vec<u8>, ArcJsonError> {
    parse_arc_json(text).map(|e| serialize_arc_json(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[&[i64]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    const MINIMAL: &str = r#"{"train":[{"input":[[0]],"output":[[0]]}],"test":[{"input":[[0]],"output":[[0]]}]}"#;

    #[test]
    fn grid_equal_cases() {
        assert!(grid_equal(&g(&[&[1]]), &g(&[&[1]])));
        assert!(!grid_equal(&g(&[&[1]]), &g(&[&[2]])));
        let a = g(&[&[1, 2, 3], &[4, 5, 6]]);
        let b = g(&[&[1, 2], &[3, 4], &[5, 6]]);
        assert!(!grid_equal(&a, &b));
    }

    #[test]
    fn minimal_document_round_trips_exactly() {
        let e = parse_arc_json(MINIMAL.as_bytes()).unwrap();
        assert_eq!(e.train.len(), 1);
        assert_eq!(e.test.len(), 1);
        assert_eq!(e.train[0].input.height(), 1);
        assert_eq!(serialize_arc_json(&e), MINIMAL.as_bytes());
    }

    #[test]
    fn cell_value_ten_is_a_bounds_violation() {
        let doc = r#"{"train":[{"input":[[10]],"output":[[0]]}],"test":[{"input":[[0]],"output":[[0]]}]}"#;
        assert!(matches!(
            parse_arc_json(doc.as_bytes()),
            Err(ArcJsonError::GridBoundsViolation { .. })
        ));
    }

    #[test]
    fn dimension_and_split_errors() {
        let wide = format!(
            r#"{{"train":[{{"input":[{:?}],"output":[[0]]}}],"test":[{{"input":[[0]],"output":[[0]]}}]}}"#,
            vec![0; 31]
        );
        assert!(matches!(
            parse_arc_json(wide.as_bytes()),
            Err(ArcJsonError::GridBoundsViolation { source: GridError::Dimensions { .. }, .. })
        ));
        let empty_rows = r#"{"train":[{"input":[],"output":[[0]]}],"test":[{"input":[[0]],"output":[[0]]}]}"#;
        assert!(matches!(
            parse_arc_json(empty_rows.as_bytes()),
            Err(ArcJsonError::GridBoundsViolation { .. })
        ));
        let no_test = r#"{"train":[{"input":[[0]],"output":[[0]]}],"test":[]}"#;
        assert_eq!(parse_arc_json(no_test.as_bytes()), Err(ArcJsonError::EmptySplit("test")));
        let no_train = r#"{"train":[],"test":[{"input":[[0]],"output":[[0]]}]}"#;
        assert_eq!(parse_arc_json(no_train.as_bytes()), Err(ArcJsonError::EmptySplit("train")));
        assert!(matches!(parse_arc_json(b"{\"train\":"), Err(ArcJsonError::MalformedJson(_))));
        let ragged = r#"{"train":[{"input":[[0,1],[0]],"output":[[0]]}],"test":[{"input":[[0]],"output":[[0]]}]}"#;
        assert!(matches!(
            parse_arc_json(ragged.as_bytes()),
            Err(ArcJsonError::GridBoundsViolation { source: GridError::Ragged { .. }, .. })
        ));
    }

    /// Hand-built documents paired with their canonical form.
    fn fixtures() -> Vec<(&'static str, &'static str)> {
        vec![
            (MINIMAL, MINIMAL),
            (
                "{ \"train\" : [ { \"input\" : [[0]], \"output\" : [[0]] } ], \"test\" : [ { \"input\" : [[0]], \"output\" : [[0]] } ] }",
                MINIMAL,
            ),
            (
                r#"{"test":[{"input":[[0]],"output":[[0]]}],"train":[{"input":[[0]],"output":[[0]]}]}"#,
                MINIMAL,
            ),
            (
                r#"{"train":[{"output":[[0]],"input":[[0]]}],"test":[{"output":[[0]],"input":[[0]]}]}"#,
                MINIMAL,
            ),
            (
                r#"{"name":"x","train":[{"input":[[0]],"output":[[0]]}],"test":[{"input":[[0]],"output":[[0]]}]}"#,
                MINIMAL,
            ),
            (
                "{\n  \"train\": [\n    {\"input\": [[1, 2], [3, 4]], \"output\": [[4, 3], [2, 1]]}\n  ],\n  \"test\": [{\"input\": [[5]], \"output\": [[5]]}]\n}\n",
                r#"{"train":[{"input":[[1,2],[3,4]],"output":[[4,3],[2,1]]}],"test":[{"input":[[5]],"output":[[5]]}]}"#,
            ),
            (
                r#"{"train":[{"input":[[1]],"output":[[2]]},{"input":[[3]],"output":[[4]]}],"test":[{"input":[[5]],"output":[[6]]}]}"#,
                r#"{"train":[{"input":[[1]],"output":[[2]]},{"input":[[3]],"output":[[4]]}],"test":[{"input":[[5]],"output":[[6]]}]}"#,
            ),
            (
                r#"{"train":[{"input":[[1]],"output":[[2]]}],"test":[{"input":[[5]],"output":[[6]]},{"input":[[7]],"output":[[8]]}]}"#,
                r#"{"train":[{"input":[[1]],"output":[[2]]}],"test":[{"input":[[5]],"output":[[6]]},{"input":[[7]],"output":[[8]]}]}"#,
            ),
            (
                r#"{"train":[{"input":[[1,2,3]],"output":[[1],[2],[3]]}],"test":[{"input":[[9,9]],"output":[[9],[9]]}]}"#,
                r#"{"train":[{"input":[[1,2,3]],"output":[[1],[2],[3]]}],"test":[{"input":[[9,9]],"output":[[9],[9]]}]}"#,
            ),
            (
                "{\"train\":[{\"input\":[[0,0,0],[0,7,0],[0,0,0]],\"output\":[[7]]}],\"test\":[{\"input\":[[8,0],[0,0]],\"output\":[[8]]}]}",
                "{\"train\":[{\"input\":[[0,0,0],[0,7,0],[0,0,0]],\"output\":[[7]]}],\"test\":[{\"input\":[[8,0],[0,0]],\"output\":[[8]]}]}",
            ),
            (
                "{\"train\":[{\"input\":[[1.0]],\"output\":[[2]]}],\"test\":[{\"input\":[[3]],\"output\":[[4]]}]}",
                "",
            ),
            (
                "\t{\"train\":[{\"input\":[[0]],\"output\":[[0]]}],\r\n\"test\":[{\"input\":[[0]],\"output\":[[0]]}]}",
                MINIMAL,
            ),
            (
                r#"{"train":[{"input":[[0]],"output":[[0]],"extra":1}],"test":[{"input":[[0]],"output":[[0]]}]}"#,
                MINIMAL,
            ),
            (
                r#"{"train":[{"input":[[9,8,7,6,5,4,3,2,1,0]],"output":[[0,1,2,3,4,5,6,7,8,9]]}],"test":[{"input":[[0]],"output":[[0]]}]}"#,
                r#"{"train":[{"input":[[9,8,7,6,5,4,3,2,1,0]],"output":[[0,1,2,3,4,5,6,7,8,9]]}],"test":[{"input":[[0]],"output":[[0]]}]}"#,
            ),
            (
                r#"{"train":[{"input":[[1],[1],[1]],"output":[[1,1,1]]}],"test":[{"input":[[2],[2]],"output":[[2,2]]}]}"#,
                r#"{"train":[{"input":[[1],[1],[1]],"output":[[1,1,1]]}],"test":[{"input":[[2],[2]],"output":[[2,2]]}]}"#,
            ),
            (
                r#"{"train" :[{"input":[[3,3],[3,3]],"output":[[3]]}, {"input":[[4]],"output":[[4]]}, {"input":[[5]],"output":[[5]]}],"test":[{"input":[[6]],"output":[[6]]}]}"#,
                r#"{"train":[{"input":[[3,3],[3,3]],"output":[[3]]},{"input":[[4]],"output":[[4]]},{"input":[[5]],"output":[[5]]}],"test":[{"input":[[6]],"output":[[6]]}]}"#,
            ),
            (
                "{\"train\":[{\"input\":[[0]],\"output\":[[0]]}],\"test\":[{\"input\":[[0]],\"output\":[[0]]}],\"train\":[{\"input\":[[1]],\"output\":[[1]]}]}",
                "",
            ),
            (
                r#"{"train":[{"input":[[0,0],[0,0]],"output":[[1,1],[1,1]]}],"test":[{"input":[[0]],"output":[[1]]}],"meta":{"k":[1,2]}}"#,
                r#"{"train":[{"input":[[0,0],[0,0]],"output":[[1,1],[1,1]]}],"test":[{"input":[[0]],"output":[[1]]}]}"#,
            ),
            (
                r#"{"train":[{"input":[[2,2,2,2]],"output":[[2],[2],[2],[2]]}],"test":[{"input":[[2,2]],"output":[[2],[2]]}]}"#,
                r#"{"train":[{"input":[[2,2,2,2]],"output":[[2],[2],[2],[2]]}],"test":[{"input":[[2,2]],"output":[[2],[2]]}]}"#,
            ),
            (
                "  {\"train\":[{\"input\":[[6, 6]],\"output\":[[6, 6]]}],\"test\":[{\"input\":[[6]],\"output\":[[6]]}]}  ",
                r#"{"train":[{"input":[[6,6]],"output":[[6,6]]}],"test":[{"input":[[6]],"output":[[6]]}]}"#,
            ),
        ]
    }

    #[test]
    fn canonicalization_fixtures() {
        let fx = fixtures();
        assert_eq!(fx.len(), 20);
        for (i, (doc, canonical)) in fx.into_iter().enumerate() {
            let got = canonicalize_arc_json(doc.as_bytes());
            if canonical.is_empty() {
                assert!(got.is_err(), "fixture {i} should be rejected");
            } else {
                assert_eq!(String::from_utf8(got.unwrap()).unwrap(), canonical, "fixture {i}");
            }
        }
    }

    #[test]
    fn histogram_counts() {
        let h = color_histogram(&g(&[&[0, 0], &[1, 0]]));
        assert_eq!(h, BTreeMap::from([(Color::of(0), 3), (Color::of(1), 1)]));
        let h = color_histogram(&Grid::filled(5, 5, Color::of(3)).unwrap());
        assert_eq!(h, BTreeMap::from([(Color::of(3), 25)]));
    }

    #[test]
    fn color_names_follow_palette() {
        assert_eq!(Color::of(2).name(), "red");
        assert_eq!(Color::of(5).name(), "grey");
        assert_eq!(Color::of(9).name(), "maroon");
        assert_eq!(Color::new(10), None);
    }
}
