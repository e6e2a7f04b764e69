//! Verification of serialized samples.
//!
//! Verification reads only the files of a dataset and the compiled-in
//! generator registry (for declared constraints, invariants and intended
//! shortcuts). It never re-samples and never writes.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{parse_reasoning, reasoning_text, Dataset, DatasetError, SampleFiles};
use crate::dsl::{self, Env, Term, TypeEnv};
use crate::generator::{detect_shortcuts, lookup, GeneratorDefinition, TaskSample};
use crate::grid::{serialize_arc_json, ArcJsonError, Episode, Grid, RawEpisode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Witness,
    Structural,
    DeclaredInvariant,
    Shortcut,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Witness => "witness",
            CheckKind::Structural => "structural",
            CheckKind::DeclaredInvariant => "declared_invariant",
            CheckKind::Shortcut => "shortcut",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Flagged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub kind: CheckKind,
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(kind: CheckKind, name: impl Into<String>, status: CheckStatus, detail: impl Into<String>) -> Check {
        Check { kind, name: name.into(), status, detail: detail.into() }
    }

    fn result(kind: CheckKind, name: impl Into<String>, r: Result<String, String>) -> Check {
        match r {
            Ok(d) => Check::new(kind, name, CheckStatus::Pass, d),
            Err(d) => Check::new(kind, name, CheckStatus::Fail, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Overall {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub sample: String,
    pub generator: String,
    pub overall: Overall,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn new(sample: &str, generator: &str, checks: Vec<Check>, strict: bool) -> VerificationReport {
        let failed = checks
            .iter()
            .any(|c| c.status == CheckStatus::Fail || (strict && c.status == CheckStatus::Flagged));
        VerificationReport {
            sample: sample.to_string(),
            generator: generator.to_string(),
            overall: if failed { Overall::Fail } else { Overall::Pass },
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.overall == Overall::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn flagged(&self) -> bool {
        self.checks.iter().any(|c| c.status == CheckStatus::Flagged)
    }
}

/// Everything the verifier looks at for one sample.
#[derive(Debug, Clone, Copy)]
pub struct Artifacts<'a> {
    pub id: &'a str,
    pub json: &'a [u8],
    pub witness: Option<&'a str>,
    pub reasoning: Option<&'a str>,
    pub taskvars: Option<&'a Env>,
}

fn first_difference(expected: &Grid, found: &Grid) -> String {
    if (expected.height(), expected.width()) != (found.height(), found.width()) {
        return format!(
            "expected {}x{} grid, found {}x{}",
            expected.height(),
            expected.width(),
            found.height(),
            found.width()
        );
    }
    expected
        .iter()
        .find(|&(r, c, color)| found.get(r, c) != color)
        .map(|(r, c, color)| format!("first differing cell ({r}, {c}): expected {color}, found {}", found.get(r, c)))
        .unwrap_or_default()
}

/// Re-runs the witness on every input; passes iff every output is reproduced.
pub fn verify_witness(episode: &Episode, witness: Option<&str>) -> Check {
    let kind = CheckKind::Witness;
    let Some(text) = witness else {
        return Check::new(kind, "witness", CheckStatus::Flagged, "no witness sidecar");
    };
    let program: Term = match dsl::parse_source(text) {
        Ok(t) => t,
        Err(e) => return Check::new(kind, "witness", CheckStatus::Fail, e.to_string()),
    };
    let free = dsl::free_vars(&program);
    if !free.is_empty() {
        let names: Vec<String> = free.into_iter().collect();
        return Check::new(kind, "witness", CheckStatus::Fail, format!("free variables: {}", names.join(", ")));
    }
    if let Err(e) = dsl::check_program(&program, &TypeEnv::new()) {
        return Check::new(kind, "witness", CheckStatus::Fail, e.to_string());
    }
    for (split, i, pair) in episode.pairs() {
        match dsl::eval(&program, &pair.input, &Env::new()) {
            Ok(out) if out == pair.output => {}
            Ok(out) => {
                let detail = format!("{split}[{i}]: {}", first_difference(&pair.output, &out));
                return Check::new(kind, "witness", CheckStatus::Fail, detail);
            }
            Err(e) => return Check::new(kind, "witness", CheckStatus::Fail, format!("{split}[{i}]: {e}")),
        }
    }
    let n = episode.train.len() + episode.test.len();
    Check::new(kind, "witness", CheckStatus::Pass, format!("{n} pairs reproduced"))
}

/// Parses the episode, reporting malformed documents and out-of-range grids.
pub fn verify_well_formed(json: &[u8]) -> (Check, Option<Episode>) {
    let parsed = RawEpisode::parse(json).and_then(|raw| raw.validate());
    let name = |e: &ArcJsonError| match e {
        ArcJsonError::GridBoundsViolation { .. } => "grid_bounds",
        ArcJsonError::EmptySplit(_) => "empty_split",
        ArcJsonError::MalformedJson(_) => "malformed_json",
    };
    match parsed {
        Ok(e) => {
            let detail = format!("{} grids within 1..30 and palette 0..9", e.grid_count());
            (Check::new(CheckKind::Structural, "grid_bounds", CheckStatus::Pass, detail), Some(e))
        }
        Err(err) => (Check::new(CheckKind::Structural, name(&err), CheckStatus::Fail, err.to_string()), None),
    }
}

/// Re-evaluates the family's episode constraints on the stored episode.
pub fn verify_structural(episode: &Episode, def: &GeneratorDefinition) -> Vec<Check> {
    def.constraints
        .iter()
        .map(|c| {
            let name = format!("constraint:{}", c.name());
            Check::result(CheckKind::Structural, name, c.check(episode).map(|_| "holds".to_string()))
        })
        .collect()
}

/// Reasoning sidecars must have both sections and no unresolved slots.
pub fn verify_reasoning(text: &str) -> Check {
    let r = match parse_reasoning(text) {
        None => Err("missing [input] or [transform] section".to_string()),
        Some((input, transform)) => match input.iter().chain(&transform).find(|l| l.contains('{') || l.contains('}')) {
            Some(line) => Err(format!("unresolved slot in line: {line}")),
            None => Ok(format!("{} lines", input.len() + transform.len())),
        },
    };
    Check::result(CheckKind::Structural, "reasoning", r)
}

pub fn verify_invariants(episode: &Episode, def: &GeneratorDefinition, taskvars: Option<&Env>) -> Vec<Check> {
    def.invariants
        .iter()
        .map(|inv| {
            let Some(tv) = taskvars else {
                return Check::new(CheckKind::DeclaredInvariant, inv.name, CheckStatus::Flagged, "no taskvars in manifest");
            };
            let failing = episode.pairs().find(|(_, _, p)| !(inv.check)(tv, &p.input, &p.output));
            let r = match failing {
                Some((split, i, _)) => Err(format!("violated by {split}[{i}]")),
                None => Ok("holds on every pair".to_string()),
            };
            Check::result(CheckKind::DeclaredInvariant, inv.name, r)
        })
        .collect()
}

/// Identity or constant outputs are flagged; a flag the family does not
/// declare as intended is a failure.
pub fn screen_shortcuts(episode: &Episode, def: &GeneratorDefinition) -> Check {
    let found = detect_shortcuts(episode);
    if found.is_empty() {
        return Check::new(CheckKind::Shortcut, "shortcut", CheckStatus::Pass, "no identity or constant outputs");
    }
    let names: Vec<&str> = found.iter().map(|s| s.name()).collect();
    let unintended: Vec<&str> =
        found.iter().filter(|s| !def.intended_shortcuts.contains(s)).map(|s| s.name()).collect();
    if unintended.is_empty() {
        Check::new(CheckKind::Shortcut, "shortcut", CheckStatus::Flagged, format!("intended: {}", names.join(", ")))
    } else {
        Check::new(CheckKind::Shortcut, "shortcut", CheckStatus::Fail, format!("unintended: {}", unintended.join(", ")))
    }
}

/// Runs every check on one sample.
pub fn verify_artifacts(a: &Artifacts, def: Option<&GeneratorDefinition>, strict: bool) -> VerificationReport {
    let generator = def.map_or("unknown", |d| d.id);
    let (well_formed, episode) = verify_well_formed(a.json);
    let mut checks = vec![well_formed];
    if let Some(text) = a.reasoning {
        checks.push(verify_reasoning(text));
    }
    let Some(def) = def else {
        checks.push(Check::new(CheckKind::Structural, "generator", CheckStatus::Fail, "unknown generator"));
        return VerificationReport::new(a.id, generator, checks, strict);
    };
    if let Some(episode) = episode {
        checks.push(verify_witness(&episode, a.witness));
        checks.extend(verify_structural(&episode, def));
        checks.extend(verify_invariants(&episode, def, a.taskvars));
        checks.push(screen_shortcuts(&episode, def));
    }
    VerificationReport::new(a.id, generator, checks, strict)
}

/// Verifies an in-memory sample through its serialized form.
pub fn verify_task_sample(s: &TaskSample, strict: bool) -> VerificationReport {
    let json = serialize_arc_json(&s.episode);
    let witness = dsl::render_source(&s.witness);
    let reasoning = reasoning_text(&s.input_reasoning, &s.transform_reasoning);
    let id = crate::dataset::sample_id(&s.provenance.generator, s.provenance.seed);
    let a = Artifacts { id: &id, json: &json, witness: Some(&witness), reasoning: Some(&reasoning), taskvars: Some(&s.taskvars) };
    verify_artifacts(&a, lookup(&s.provenance.generator).ok(), strict)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetReport {
    pub strict: bool,
    pub summary: Summary,
    /// Sorted by sample id.
    pub samples: Vec<VerificationReport>,
}

impl DatasetReport {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("reports serialize");
        out.push(b'\n');
        out
    }
}

fn verify_files(ds: &Dataset, f: &SampleFiles, strict: bool) -> VerificationReport {
    let entry = ds.manifest.as_ref().and_then(|m| m.entry(&f.id));
    let generator = ds.generator_of(&f.id);
    let a = Artifacts {
        id: &f.id,
        json: &f.json,
        witness: f.witness.as_deref(),
        reasoning: f.reasoning.as_deref(),
        taskvars: entry.map(|e| &e.taskvars),
    };
    let mut report = verify_artifacts(&a, lookup(&generator).ok(), strict);
    if entry.is_none() {
        report.checks.insert(
            0,
            Check::new(CheckKind::Structural, "manifest", CheckStatus::Fail, "sample is not listed in the manifest"),
        );
        report.overall = Overall::Fail;
    }
    report
}

/// Verifies every sample of a dataset directory.
pub fn verify_dataset(dir: &Path, strict: bool) -> Result<DatasetReport, DatasetError> {
    let ds = Dataset::load(dir)?;
    let manifest = ds.require_manifest()?;
    let mut samples: Vec<VerificationReport> = ds.samples.par_iter().map(|f| verify_files(&ds, f, strict)).collect();
    for entry in &manifest.samples {
        if ds.samples.binary_search_by(|f| f.id.as_str().cmp(&entry.id)).is_err() {
            let check = Check::new(CheckKind::Structural, "manifest", CheckStatus::Fail, "listed sample file is missing");
            samples.push(VerificationReport::new(&entry.id, &entry.generator, vec![check], strict));
        }
    }
    samples.sort_by(|a, b| a.sample.cmp(&b.sample));
    let passed = samples.iter().filter(|r| r.passed()).count();
    let summary = Summary {
        total: samples.len(),
        passed,
        failed: samples.len() - passed,
        flagged: samples.iter().filter(|r| r.flagged()).count(),
    };
    Ok(DatasetReport { strict, summary, samples })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;
    use std::fs;

    use super::*;
    use crate::dataset::{sample_many, write_dataset, WriteOptions};
    use crate::exemplars::{catalog, G3, G5};
    use crate::generator::{create_task, Shortcut};
    use crate::grid::{Color, Pair};

    fn g(rows: &[&[i64]]) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn untampered_samples_pass() {
        for d in catalog() {
            for seed in 0..20 {
                let r = verify_task_sample(&create_task(d, seed).unwrap(), true);
                assert!(r.passed(), "{r:?}");
                let kinds: BTreeSet<CheckKind> = r.checks.iter().map(|c| c.kind).collect();
                assert!(kinds.contains(&CheckKind::Witness) && kinds.contains(&CheckKind::Shortcut));
            }
        }
    }

    #[test]
    fn flipped_output_cell_is_located() {
        let mut s = create_task(lookup(G5).unwrap(), 1).unwrap();
        let out = &mut s.episode.train[1].output;
        let old = out.get(0, 0);
        out.set(0, 0, Color::of((old.value() + 1) % 10));
        let c = verify_witness(&s.episode, Some(&dsl::render_source(&s.witness)));
        assert_eq!(c.status, CheckStatus::Fail);
        assert!(c.detail.starts_with("train[1]: first differing cell (0, 0)"), "{}", c.detail);
    }

    #[test]
    fn identity_witness_fails_on_non_identity_family() {
        let s = create_task(lookup(G3).unwrap(), 2).unwrap();
        assert!(s.episode.pairs().any(|(_, _, p)| p.input != p.output));
        assert_eq!(verify_witness(&s.episode, Some("(input)")).status, CheckStatus::Fail);
        assert_eq!(verify_witness(&s.episode, Some("(input")).status, CheckStatus::Fail);
        assert_eq!(verify_witness(&s.episode, Some("(rotate (input) $k)")).status, CheckStatus::Fail);
        assert_eq!(verify_witness(&s.episode, None).status, CheckStatus::Flagged);
    }

    #[test]
    fn structural_failures() {
        let s = create_task(lookup(G3).unwrap(), 4).unwrap();
        let def = lookup(G3).unwrap();
        let mut e = s.episode.clone();
        let used: BTreeSet<Color> = e.train.iter().flat_map(|p| [&p.input, &p.output]).flat_map(|g| g.cells().to_vec()).collect();
        let unseen = Color::all().find(|c| !used.contains(c)).unwrap();
        e.test[0].input.set(0, 0, unseen);
        let checks = verify_structural(&e, def);
        let fail = checks.iter().find(|c| c.name == "constraint:no_test_only_colors").unwrap();
        assert_eq!(fail.status, CheckStatus::Fail);
        assert!(fail.detail.contains(&format!("{{color:{}}}", unseen.value())));

        let wide = format!("{{\"train\":[{{\"input\":[[{}]],\"output\":[[1]]}}],\"test\":[{{\"input\":[[1]],\"output\":[[1]]}}]}}", vec!["0"; 31].join(","));
        let (c, e) = verify_well_formed(wide.as_bytes());
        assert_eq!((c.name.as_str(), c.status, e), ("grid_bounds", CheckStatus::Fail, None));
        assert_eq!(verify_well_formed(b"{").0.name, "malformed_json");
    }

    #[test]
    fn shortcut_screening_respects_intent() {
        let mut def = lookup(G5).unwrap().clone();
        let grid = g(&[&[1, 0], &[0, 2]]);
        let other = g(&[&[3]]);
        let e = Episode {
            train: vec![Pair { input: grid.clone(), output: grid.clone() }, Pair { input: other.clone(), output: other.clone() }],
            test: vec![Pair { input: grid.clone(), output: grid }],
        };
        def.intended_shortcuts = BTreeSet::from([Shortcut::Identity]);
        let c = screen_shortcuts(&e, &def);
        assert_eq!(c.status, CheckStatus::Flagged);
        assert!(VerificationReport::new("x", "y", vec![c.clone()], false).passed());
        assert!(!VerificationReport::new("x", "y", vec![c], true).passed());
        def.intended_shortcuts.clear();
        assert_eq!(screen_shortcuts(&e, &def).status, CheckStatus::Fail);
        let s = create_task(lookup(G5).unwrap(), 9).unwrap();
        assert_eq!(screen_shortcuts(&s.episode, lookup(G5).unwrap()).status, CheckStatus::Pass);
    }

    #[test]
    fn reasoning_slots_are_checked() {
        assert_eq!(verify_reasoning("[input]\nfine\n\n[transform]\nok\n").status, CheckStatus::Pass);
        assert_eq!(verify_reasoning("[input]\nfine {c}\n\n[transform]\nok\n").status, CheckStatus::Fail);
        assert_eq!(verify_reasoning("no sections").status, CheckStatus::Fail);
    }

    #[test]
    fn dataset_verification() {
        let dir = tempfile::tempdir().unwrap();
        let defs: Vec<&GeneratorDefinition> = catalog().iter().collect();
        let samples = sample_many(&defs, 3, 0).unwrap();
        write_dataset(dir.path(), &samples, WriteOptions { witness: true, reasoning: true }).unwrap();
        let report = verify_dataset(dir.path(), false).unwrap();
        assert_eq!(report.summary, Summary { total: 18, passed: 18, failed: 0, flagged: 0 });
        let before: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
        assert_eq!(verify_dataset(dir.path(), false).unwrap(), report);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), before.len());

        let path = dir.path().join(format!("{}__1.json", G5));
        let text = fs::read_to_string(&path).unwrap();
        let tampered = text.replacen("\"output\":[[", "\"output\":[[9,", 1);
        fs::write(&path, tampered).unwrap();
        let report = verify_dataset(dir.path(), false).unwrap();
        assert_eq!((report.summary.passed, report.summary.failed), (17, 1));

        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(verify_dataset(empty.path(), false), Err(DatasetError::MissingManifest(_))));
    }
}
