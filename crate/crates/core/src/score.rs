//! Exact-match scoring of solver predictions.
//!
//! A prediction file maps sample ids to one predicted output grid per test
//! pair. A sample is solved iff every prediction equals its ground truth
//! cell for cell.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::dataset::LoadedEpisode;
use crate::grid::{grid_equal, Grid};

pub type Predictions = BTreeMap<String, Vec<Grid>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("sample {id}: {found} prediction(s) for {expected} test pair(s)")]
    ArityMismatch { id: String, expected: usize, found: usize },
    #[error("prediction for unknown sample {0}")]
    UnknownSampleId(String),
    #[error("no prediction for sample {0}")]
    MissingPrediction(String),
    #[error("malformed prediction file: {0}")]
    MalformedPredictions(String),
    #[error("generator sets differ between `{0}` and `{1}`")]
    GeneratorSetMismatch(String, String),
    #[error("no table labeled `{0}`")]
    UnknownReference(String),
}

pub fn parse_predictions(text: &[u8]) -> Result<Predictions, ScoreError> {
    serde_json::from_slice(text).map_err(|e| ScoreError::MalformedPredictions(e.to_string()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreOptions {
    /// Missing predictions are errors instead of unsolved samples.
    pub strict_predictions: bool,
    /// Predictions for ids absent from the dataset are errors instead of warnings.
    pub strict_unknown: bool,
    /// Flag samples whose episode has more cells than this. A size proxy
    /// only; it is not a token count.
    pub max_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleScore {
    pub id: String,
    pub generator: String,
    pub solved: bool,
    pub missing: bool,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorScore {
    pub generator: String,
    pub solved: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    /// Sorted by id.
    pub samples: Vec<SampleScore>,
    /// Sorted by generator id.
    pub generators: Vec<GeneratorScore>,
    pub solved: usize,
    pub total: usize,
    /// Mean of per-sample indicators.
    pub overall_accuracy: f64,
    /// Mean of per-generator accuracies.
    pub mean_generator_accuracy: f64,
    pub warnings: Vec<String>,
    /// Ids over the `max_cells` budget, when one was given.
    pub over_cell_budget: Vec<String>,
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

pub fn score(dataset: &[LoadedEpisode], predictions: &Predictions, opts: ScoreOptions) -> Result<ScoreTable, ScoreError> {
    let mut warnings = Vec::new();
    let ids: BTreeSet<&str> = dataset.iter().map(|s| s.id.as_str()).collect();
    for id in predictions.keys().filter(|id| !ids.contains(id.as_str())) {
        if opts.strict_unknown {
            return Err(ScoreError::UnknownSampleId(id.clone()));
        }
        warnings.push(format!("ignoring prediction for unknown sample {id}"));
    }
    let mut samples = Vec::with_capacity(dataset.len());
    for s in dataset {
        let truth: Vec<&Grid> = s.episode.test.iter().map(|p| &p.output).collect();
        let cells = s.episode.pairs().map(|(_, _, p)| p.input.area() + p.output.area()).sum();
        let (solved, missing) = match predictions.get(&s.id) {
            None if opts.strict_predictions => return Err(ScoreError::MissingPrediction(s.id.clone())),
            None => {
                warnings.push(format!("no prediction for sample {}; counted unsolved", s.id));
                (false, true)
            }
            Some(preds) if preds.len() != truth.len() => {
                return Err(ScoreError::ArityMismatch { id: s.id.clone(), expected: truth.len(), found: preds.len() })
            }
            Some(preds) => (preds.iter().zip(&truth).all(|(p, t)| grid_equal(p, t)), false),
        };
        samples.push(SampleScore { id: s.id.clone(), generator: s.generator.clone(), solved, missing, cells });
    }
    samples.sort_by(|a, b| a.id.cmp(&b.id));
    warnings.sort();

    let mut per_gen: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for s in &samples {
        let e = per_gen.entry(&s.generator).or_default();
        e.0 += usize::from(s.solved);
        e.1 += 1;
    }
    let generators: Vec<GeneratorScore> = per_gen
        .into_iter()
        .map(|(g, (solved, total))| GeneratorScore { generator: g.to_string(), solved, total, accuracy: ratio(solved, total) })
        .collect();
    let solved = samples.iter().filter(|s| s.solved).count();
    let total = samples.len();
    let mean_generator_accuracy = if generators.is_empty() {
        0.0
    } else {
        generators.iter().map(|g| g.accuracy).sum::<f64>() / generators.len() as f64
    };
    let over_cell_budget = match opts.max_cells {
        Some(limit) => samples.iter().filter(|s| s.cells > limit).map(|s| s.id.clone()).collect(),
        None => vec![],
    };
    Ok(ScoreTable {
        samples,
        generators,
        solved,
        total,
        overall_accuracy: ratio(solved, total),
        mean_generator_accuracy,
        warnings,
        over_cell_budget,
    })
}

impl ScoreTable {
    /// `generator_id,solved,total,accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generator_id,solved,total,accuracy\n");
        for g in &self.generators {
            writeln!(out, "{},{},{},{}", g.generator, g.solved, g.total, g.accuracy).unwrap();
        }
        out
    }

    /// Aggregate figures for `overall.json`.
    pub fn overall_json(&self) -> Vec<u8> {
        let missing = self.samples.iter().filter(|s| s.missing).count();
        let v = serde_json::json!({
            "solved": self.solved,
            "total": self.total,
            "missing": missing,
            "overall_accuracy": self.overall_accuracy,
            "mean_generator_accuracy": self.mean_generator_accuracy,
            "warnings": self.warnings,
            "over_cell_budget": self.over_cell_budget,
        });
        let mut out = serde_json::to_vec_pretty(&v).expect("json values serialize");
        out.push(b'\n');
        out
    }

    fn accuracy_by_generator(&self) -> BTreeMap<&str, f64> {
        self.generators.iter().map(|g| (g.generator.as_str(), g.accuracy)).collect()
    }
}

/// Model-by-generator accuracies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifficultyMatrix {
    /// Ordered by mean accuracy, highest first.
    pub models: Vec<String>,
    /// Ordered by the reference model's accuracy, highest first.
    pub generators: Vec<String>,
    /// `values[model][generator]`.
    pub values: Vec<Vec<f64>>,
}

/// Ties keep input order.
pub fn difficulty_matrix(tables: &[(String, ScoreTable)], reference: &str) -> Result<DifficultyMatrix, ScoreError> {
    let maps: Vec<(&str, BTreeMap<&str, f64>)> =
        tables.iter().map(|(label, t)| (label.as_str(), t.accuracy_by_generator())).collect();
    if let Some((first, first_map)) = maps.first() {
        for (label, m) in &maps[1..] {
            if !m.keys().eq(first_map.keys()) {
                return Err(ScoreError::GeneratorSetMismatch(first.to_string(), label.to_string()));
            }
        }
    }
    let ref_map = &maps
        .iter()
        .find(|(l, _)| *l == reference)
        .ok_or_else(|| ScoreError::UnknownReference(reference.to_string()))?
        .1;
    let mut generators: Vec<&str> = ref_map.keys().copied().collect();
    generators.sort_by(|a, b| ref_map[b].total_cmp(&ref_map[a]));
    let mean = |m: &BTreeMap<&str, f64>| m.values().sum::<f64>() / m.len().max(1) as f64;
    let mut order: Vec<usize> = (0..maps.len()).collect();
    order.sort_by(|&a, &b| mean(&maps[b].1).total_cmp(&mean(&maps[a].1)));
    Ok(DifficultyMatrix {
        models: order.iter().map(|&i| maps[i].0.to_string()).collect(),
        values: order.iter().map(|&i| generators.iter().map(|g| maps[i].1[g]).collect()).collect(),
        generators: generators.into_iter().map(str::to_string).collect(),
    })
}
