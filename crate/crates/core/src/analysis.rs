//! Distributional summaries of datasets: grid-size heatmaps, per-grid
//! features and uniqueness measures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::LoadedEpisode;
use crate::grid::{serialize_arc_json, Color, Grid, Split};
use crate::objects::dominant_color;

pub const WINDOW_MIN: usize = 5;
pub const WINDOW_MAX: usize = 30;
const SPAN: usize = WINDOW_MAX - WINDOW_MIN + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Output,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::Output => "output",
        }
    }
}

/// Grid counts by `(rows, cols)` inside the 5..=30 window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeHeatmap {
    pub min_dim: usize,
    pub max_dim: usize,
    /// `counts[r - min_dim][c - min_dim]`.
    pub counts: Vec<Vec<usize>>,
    pub out_of_window: usize,
}

impl SizeHeatmap {
    pub fn count(&self, rows: usize, cols: usize) -> usize {
        let idx = |d: usize| (WINDOW_MIN..=WINDOW_MAX).contains(&d).then(|| d - WINDOW_MIN);
        match (idx(rows), idx(cols)) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    pub fn in_window(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn total(&self) -> usize {
        self.in_window() + self.out_of_window
    }

    /// A 27x27 table: the header row holds column counts, the first column
    /// row counts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rows\\cols");
        for c in WINDOW_MIN..=WINDOW_MAX {
            write!(out, ",{c}").unwrap();
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            write!(out, "{}", i + WINDOW_MIN).unwrap();
            for n in row {
                write!(out, ",{n}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// One increment per grid of the selected role, train and test alike.
pub fn size_heatmap(dataset: &[LoadedEpisode], which: Role) -> SizeHeatmap {
    let mut map =
        SizeHeatmap { min_dim: WINDOW_MIN, max_dim: WINDOW_MAX, counts: vec![vec![0; SPAN]; SPAN], out_of_window: 0 };
    let inside = |d: usize| (WINDOW_MIN..=WINDOW_MAX).contains(&d);
    for s in dataset {
        for (_, _, p) in s.episode.pairs() {
            let g = match which {
                Role::Input => &p.input,
                Role::Output => &p.output,
            };
            if inside(g.height()) && inside(g.width()) {
                map.counts[g.height() - WINDOW_MIN][g.width() - WINDOW_MIN] += 1;
            } else {
                map.out_of_window += 1;
            }
        }
    }
    map
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFeatureRow {
    pub sample: String,
    pub split: Split,
    pub pair: usize,
    pub role: Role,
    /// Midpoint of the foreground bounding box; `None` for an empty grid.
    pub center: Option<(f64, f64)>,
    pub area: usize,
    pub dominant: Option<Color>,
}

/// Features of the union of all non-background cells.
pub fn grid_features(g: &Grid) -> (Option<(f64, f64)>, usize, Option<Color>) {
    let fg: Vec<(usize, usize, Color)> = g.iter().filter(|&(_, _, c)| c != Color::BACKGROUND).collect();
    if fg.is_empty() {
        return (None, 0, None);
    }
    let (mut top, mut bottom, mut left, mut right) = (usize::MAX, 0, usize::MAX, 0);
    for &(r, c, _) in &fg {
        top = top.min(r);
        bottom = bottom.max(r);
        left = left.min(c);
        right = right.max(c);
    }
    let center = ((top + bottom) as f64 / 2.0, (left + right) as f64 / 2.0);
    (Some(center), fg.len(), dominant_color(fg.iter().map(|&(_, _, c)| c)))
}

/// One row per grid, ordered by sample id, then split, pair and role.
pub fn extract_features(dataset: &[LoadedEpisode]) -> Vec<GridFeatureRow> {
    let mut rows = Vec::new();
    for s in dataset {
        for (split, pair, p) in s.episode.pairs() {
            for (role, g) in [(Role::Input, &p.input), (Role::Output, &p.output)] {
                let (center, area, dominant) = grid_features(g);
                rows.push(GridFeatureRow { sample: s.id.clone(), split, pair, role, center, area, dominant });
            }
        }
    }
    rows.sort_by(|a, b| (&a.sample, a.split, a.pair, a.role).cmp(&(&b.sample, b.split, b.pair, b.role)));
    rows
}

/// Undefined centers and colors are written as `NA`.
pub fn features_csv(rows: &[GridFeatureRow]) -> String {
    let mut out = String::from("sample,split,pair,role,center_row,center_col,area,dominant\n");
    for r in rows {
        let (cr, cc) = match r.center {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => ("NA".to_string(), "NA".to_string()),
        };
        let dominant = r.dominant.map_or("NA".to_string(), |c| c.value().to_string());
        writeln!(out, "{},{},{},{},{cr},{cc},{},{dominant}", r.sample, r.split, r.pair, r.role.name(), r.area).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorDiversity {
    pub samples: usize,
    pub unique_inputs: f64,
    pub unique_episodes: f64,
    /// Ids of samples whose episode repeats an earlier one.
    pub duplicate_episodes: Vec<String>,
    /// Distinct values seen per task variable, from the manifest.
    pub taskvar_coverage: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityReport {
    /// How uniqueness is measured.
    pub uniqueness: &'static str,
    pub generators: BTreeMap<String, GeneratorDiversity>,
}

impl DiversityReport {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("reports serialize");
        out.push(b'\n');
        out
    }
}

pub fn diversity(dataset: &[LoadedEpisode]) -> DiversityReport {
    let mut groups: BTreeMap<&str, Vec<&LoadedEpisode>> = BTreeMap::new();
    for s in dataset {
        groups.entry(&s.generator).or_default().push(s);
    }
    let generators = groups
        .into_iter()
        .map(|(generator, mut samples)| {
            samples.sort_by(|a, b| a.id.cmp(&b.id));
            let mut inputs = BTreeSet::new();
            let mut total_inputs = 0;
            let mut episodes = BTreeSet::new();
            let mut duplicate_episodes = Vec::new();
            let mut coverage: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
            for s in &samples {
                for (_, _, p) in s.episode.pairs() {
                    inputs.insert(serde_json::to_vec(&p.input).expect("grids serialize"));
                    total_inputs += 1;
                }
                if !episodes.insert(serialize_arc_json(&s.episode)) {
                    duplicate_episodes.push(s.id.clone());
                }
                for (name, value) in s.taskvars.iter().flatten() {
                    coverage.entry(name.clone()).or_default().insert(value.to_string());
                }
            }
            let frac = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
            let report = GeneratorDiversity {
                samples: samples.len(),
                unique_inputs: frac(inputs.len(), total_inputs),
                unique_episodes: frac(episodes.len(), samples.len()),
                duplicate_episodes,
                taskvar_coverage: coverage.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
            };
            (generator.to_string(), report)
        })
        .collect();
    DiversityReport { uniqueness: "exact canonical ARC-JSON serialization", generators }
}
