//! Task-family definitions and the episode pipeline.
//!
//! A [`GeneratorDefinition`] describes a family declaratively: task
//! variables fixed for an episode, grid variables drawn per grid, an input
//! builder, a transform program over the task variables, episode-level
//! constraints and reasoning templates. [`create_task`] turns a definition
//! and a seed into a verified [`TaskSample`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, DslError, Env, Scalar, Term};
use crate::grid::{color_histogram, Color, Episode, Grid, Pair};
use crate::objects::{find_connected_objects, Connectivity, ExtractionMode};
use crate::sampler::{RngStream, SampleError, GRID_ATTEMPTS, PRNG_ALGORITHM};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Taskvar redraws before giving up.
pub const TASKVAR_ATTEMPTS: usize = 20;
/// Episode redraws per taskvar draw.
pub const EPISODE_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("{generator}: budget exhausted after {attempts} episode attempts ({reason})")]
    BudgetExhausted { generator: String, attempts: usize, reason: String },
    #[error("{generator}: {source}")]
    Dsl { generator: String, source: DslError },
    #[error("{generator}: {source}")]
    Template { generator: String, source: TemplateError },
    #[error("invalid definition {generator}: {message}")]
    InvalidDefinition { generator: String, message: String },
    #[error("unknown generator `{0}`")]
    NotFound(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("template line {line}: cannot resolve slot `{slot}`")]
pub struct TemplateError {
    pub line: usize,
    pub slot: String,
}

/// How a single variable is drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum VarSampler {
    /// Uniform integer in `lo..=hi`.
    IntRange(i64, i64),
    OneOf(Vec<Scalar>),
    /// Uniform color outside `exclude`, optionally distinct from every
    /// color variable drawn earlier in the same spec list.
    Color { exclude: Vec<Color>, distinct_from_earlier: bool },
}

impl VarSampler {
    pub fn foreground_color() -> VarSampler {
        VarSampler::Color { exclude: vec![Color::BACKGROUND], distinct_from_earlier: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSpec {
    pub name: &'static str,
    pub sampler: VarSampler,
}

impl VarSpec {
    pub fn new(name: &'static str, sampler: VarSampler) -> VarSpec {
        VarSpec { name, sampler }
    }
}

/// Draws every variable of `specs` in order.
pub fn sample_vars(rng: &mut RngStream, specs: &[VarSpec]) -> Result<Env, SampleError> {
    let mut env = Env::new();
    for spec in specs {
        let value = match &spec.sampler {
            VarSampler::IntRange(lo, hi) => Scalar::Int(rng.range(*lo, *hi)),
            VarSampler::OneOf(options) => *rng.pick(options),
            VarSampler::Color { exclude, distinct_from_earlier } => {
                let taken: BTreeSet<Color> = if *distinct_from_earlier {
                    env.values()
                        .filter_map(|v| match v {
                            Scalar::Color(c) => Some(*c),
                            _ => None,
                        })
                        .collect()
                } else {
                    BTreeSet::new()
                };
                let pool: Vec<Color> =
                    Color::all().filter(|c| !exclude.contains(c) && !taken.contains(c)).collect();
                if pool.is_empty() {
                    return Err(SampleError::InsufficientPalette { needed: 1, available: 0 });
                }
                Scalar::Color(*rng.pick(&pool))
            }
        };
        env.insert(spec.name.to_string(), value);
    }
    Ok(env)
}

/// Per-grid feature compared by [`EpisodeConstraint::TestDistinctness`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    /// Single-color objects on background 0.
    ObjectCount(Connectivity),
    /// Distinct non-background colors.
    ColorCount,
}

impl Feature {
    pub fn of(self, grid: &Grid) -> usize {
        match self {
            Feature::ObjectCount(conn) => find_connected_objects(grid, conn, ExtractionMode::same_color()).len(),
            Feature::ColorCount => color_histogram(grid).keys().filter(|c| **c != Color::BACKGROUND).count(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::ObjectCount(_) => "object_count",
            Feature::ColorCount => "color_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    DiffersFromAllTrain,
    GreaterThanAllTrain,
}

impl Relation {
    fn holds(self, test: usize, train: &[usize]) -> bool {
        match self {
            Relation::DiffersFromAllTrain => !train.contains(&test),
            Relation::GreaterThanAllTrain => train.iter().all(|t| test > *t),
        }
    }
}

/// A predicate over a whole episode. All variants are pure.
#[derive(Clone)]
pub enum EpisodeConstraint {
    /// Every color of every test grid appears in some train grid.
    NoTestOnlyColors,
    /// Every object size in the test inputs appears among train input objects.
    NoTestOnlyObjectSizes { conn: Connectivity, mode: ExtractionMode },
    /// Evaluated on the train inputs only.
    CoveragePredicate { name: &'static str, predicate: fn(&[&Grid]) -> bool },
    /// Compares a feature of each test input with the train inputs.
    TestDistinctness { feature: Feature, relation: Relation },
    CustomPredicate { name: &'static str, predicate: fn(&Episode) -> bool },
}

impl fmt::Debug for EpisodeConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl EpisodeConstraint {
    pub fn kind(&self) -> &'static str {
        match self {
            EpisodeConstraint::NoTestOnlyColors => "no_test_only_colors",
            EpisodeConstraint::NoTestOnlyObjectSizes { .. } => "no_test_only_object_sizes",
            EpisodeConstraint::CoveragePredicate { .. } => "coverage",
            EpisodeConstraint::TestDistinctness { .. } => "test_distinctness",
            EpisodeConstraint::CustomPredicate { .. } => "custom",
        }
    }

    pub fn name(&self) -> String {
        match self {
            EpisodeConstraint::CoveragePredicate { name, .. } | EpisodeConstraint::CustomPredicate { name, .. } => {
                format!("{}:{name}", self.kind())
            }
            EpisodeConstraint::TestDistinctness { feature, relation } => {
                let rel = match relation {
                    Relation::DiffersFromAllTrain => "differs_from_all_train",
                    Relation::GreaterThanAllTrain => "greater_than_all_train",
                };
                format!("{}:{}:{rel}", self.kind(), feature.name())
            }
            _ => self.kind().to_string(),
        }
    }

    /// `Ok(())` or a human-readable reason for the failure.
    pub fn check(&self, e: &Episode) -> Result<(), String> {
        match self {
            EpisodeConstraint::NoTestOnlyColors => {
                let seen: BTreeSet<Color> = e
                    .train
                    .iter()
                    .flat_map(|p| [&p.input, &p.output])
                    .flat_map(|g| g.cells().iter().copied())
                    .collect();
                for (i, p) in e.test.iter().enumerate() {
                    for (role, g) in [("input", &p.input), ("output", &p.output)] {
                        if let Some(c) = g.cells().iter().find(|c| !seen.contains(c)) {
                            return Err(format!("{{color:{}}} appears only in test {i} {role}", c.value()));
                        }
                    }
                }
                Ok(())
            }
            EpisodeConstraint::NoTestOnlyObjectSizes { conn, mode } => {
                let sizes = |g: &Grid| -> BTreeSet<usize> {
                    find_connected_objects(g, *conn, *mode).iter().map(|o| o.size()).collect()
                };
                let seen: BTreeSet<usize> = e.train.iter().flat_map(|p| sizes(&p.input)).collect();
                for (i, p) in e.test.iter().enumerate() {
                    if let Some(s) = sizes(&p.input).into_iter().find(|s| !seen.contains(s)) {
                        return Err(format!("{{object_size:{s}}} appears only in test {i} input"));
                    }
                }
                Ok(())
            }
            EpisodeConstraint::CoveragePredicate { name, predicate } => {
                let inputs: Vec<&Grid> = e.train.iter().map(|p| &p.input).collect();
                if predicate(&inputs) {
                    Ok(())
                } else {
                    Err(format!("train inputs do not satisfy `{name}`"))
                }
            }
            EpisodeConstraint::TestDistinctness { feature, relation } => {
                let train: Vec<usize> = e.train.iter().map(|p| feature.of(&p.input)).collect();
                for (i, p) in e.test.iter().enumerate() {
                    let t = feature.of(&p.input);
                    if !relation.holds(t, &train) {
                        return Err(format!("test {i} {} {t} vs train {train:?}", feature.name()));
                    }
                }
                Ok(())
            }
            EpisodeConstraint::CustomPredicate { name, predicate } => {
                if predicate(e) {
                    Ok(())
                } else {
                    Err(format!("`{name}` does not hold"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintOutcome {
    pub constraint: String,
    pub passed: bool,
    pub detail: String,
}

pub fn check_constraints(e: &Episode, cs: &[EpisodeConstraint]) -> Vec<ConstraintOutcome> {
    cs.iter()
        .map(|c| {
            let result = c.check(e);
            ConstraintOutcome {
                constraint: c.name(),
                passed: result.is_ok(),
                detail: result.err().unwrap_or_default(),
            }
        })
        .collect()
}

/// A per-pair property the family promises, given its taskvars.
#[derive(Clone)]
pub struct DeclaredInvariant {
    pub name: &'static str,
    pub check: fn(&Env, &Grid, &Grid) -> bool,
}

impl fmt::Debug for DeclaredInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shortcut {
    /// Every pair has output = input.
    Identity,
    /// Every output of the episode is the same grid.
    Constant,
}

impl Shortcut {
    pub fn name(self) -> &'static str {
        match self {
            Shortcut::Identity => "identity",
            Shortcut::Constant => "constant",
        }
    }
}

pub fn detect_shortcuts(e: &Episode) -> BTreeSet<Shortcut> {
    let mut out = BTreeSet::new();
    let pairs: Vec<&Pair> = e.train.iter().chain(&e.test).collect();
    if pairs.iter().all(|p| p.input == p.output) {
        out.insert(Shortcut::Identity);
    }
    if pairs.windows(2).all(|w| w[0].output == w[1].output) {
        out.insert(Shortcut::Constant);
    }
    out
}

pub type InputBuilder = fn(&mut RngStream, &Env, &Env) -> Result<Grid, SampleError>;
pub type TransformBuilder = fn(&Env) -> Term;

#[derive(Debug, Clone)]
pub struct GeneratorDefinition {
    pub id: &'static str,
    pub summary: &'static str,
    pub taskvars: Vec<VarSpec>,
    pub gridvars: Vec<VarSpec>,
    pub input_builder: InputBuilder,
    pub transform_builder: TransformBuilder,
    /// Inclusive range of train pairs.
    pub train_count: (usize, usize),
    /// Inclusive range of test pairs.
    pub test_count: (usize, usize),
    pub constraints: Vec<EpisodeConstraint>,
    pub input_template: Vec<&'static str>,
    pub transform_template: Vec<&'static str>,
    pub invariants: Vec<DeclaredInvariant>,
    pub intended_shortcuts: BTreeSet<Shortcut>,
}

impl GeneratorDefinition {
    pub fn constraint_kinds(&self) -> Vec<&'static str> {
        let mut kinds: Vec<&'static str> = self.constraints.iter().map(EpisodeConstraint::kind).collect();
        kinds.dedup();
        kinds
    }

    /// Static checks that do not need sampling: counts, variable names and
    /// template slots.
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let fail = |message: String| GeneratorError::InvalidDefinition { generator: self.id.to_string(), message };
        let (lo, hi) = self.train_count;
        if lo == 0 || lo > hi {
            return Err(fail(format!("train count range {lo}..={hi}")));
        }
        let (lo, hi) = self.test_count;
        if lo == 0 || lo > hi {
            return Err(fail(format!("test count range {lo}..={hi}")));
        }
        let mut names = BTreeSet::new();
        for spec in self.taskvars.iter().chain(&self.gridvars) {
            if !names.insert(spec.name) {
                return Err(fail(format!("duplicate variable `{}`", spec.name)));
            }
        }
        let taskvar_names: BTreeSet<&str> = self.taskvars.iter().map(|v| v.name).collect();
        for (i, line) in self.input_template.iter().chain(&self.transform_template).enumerate() {
            for slot in parse_slots(line).map_err(|slot| fail(format!("template line {}: bad slot `{slot}`", i + 1)))? {
                if !taskvar_names.contains(slot.name.as_str()) {
                    return Err(fail(format!("template slot `{}` is not a task variable", slot.name)));
                }
            }
        }
        Ok(())
    }
}

/// Sampling effort recorded with every sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempts {
    pub taskvars: usize,
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub engine_version: String,
    pub prng: String,
    pub attempts: Attempts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskSample {
    pub episode: Episode,
    pub taskvars: Env,
    /// Train pairs first, then test pairs.
    pub gridvars: Vec<Env>,
    pub input_reasoning: Vec<String>,
    pub transform_reasoning: Vec<String>,
    #[serde(serialize_with = "serialize_term")]
    pub witness: Term,
    pub provenance: Provenance,
}

fn serialize_term<S: serde::Serializer>(term: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&dsl::render_source(term))
}

impl TaskSample {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("task samples always serialize")
    }
}

/// Runs the full pipeline for one `(definition, seed)` pair.
///
/// Gridvars and inputs are redrawn up to [`EPISODE_ATTEMPTS`] times per
/// taskvar draw, and taskvars up to [`TASKVAR_ATTEMPTS`] times. A candidate
/// episode is kept only if it satisfies every constraint and declared
/// invariant and shows no unintended shortcut.
pub fn create_task(def: &GeneratorDefinition, seed: u64) -> Result<TaskSample, GeneratorError> {
    def.validate()?;
    let generator = def.id.to_string();
    let dsl_err = |source: DslError| GeneratorError::Dsl { generator: generator.clone(), source };
    let mut rng = RngStream::derive(seed, def.id);
    let mut episodes_tried = 0;
    let mut last_reason = String::from("no attempt succeeded");
    for taskvar_attempt in 1..=TASKVAR_ATTEMPTS {
        let taskvars = match sample_vars(&mut rng, &def.taskvars) {
            Ok(env) => env,
            Err(e) => {
                last_reason = e.to_string();
                continue;
            }
        };
        let program = (def.transform_builder)(&taskvars);
        let taskvar_names: BTreeSet<String> = taskvars.keys().cloned().collect();
        if let Some(v) = dsl::free_vars(&program).into_iter().find(|v| !taskvar_names.contains(v)) {
            return Err(GeneratorError::InvalidDefinition {
                generator,
                message: format!("transform mentions `{v}`, which is not a task variable"),
            });
        }
        dsl::check_program(&program, &dsl::type_env(&taskvars)).map_err(dsl_err)?;
        let witness = dsl::partial_eval(&program, &taskvars).map_err(dsl_err)?;

        for _ in 0..EPISODE_ATTEMPTS {
            episodes_tried += 1;
            match draw_episode(def, &mut rng, &taskvars, &witness).map_err(dsl_err)? {
                Ok((episode, gridvars)) => {
                    let input_reasoning = instantiate_template(&def.input_template, &taskvars)
                        .map_err(|source| GeneratorError::Template { generator: generator.clone(), source })?;
                    let transform_reasoning = instantiate_template(&def.transform_template, &taskvars)
                        .map_err(|source| GeneratorError::Template { generator: generator.clone(), source })?;
                    return Ok(TaskSample {
                        episode,
                        taskvars,
                        gridvars,
                        input_reasoning,
                        transform_reasoning,
                        witness,
                        provenance: Provenance {
                            generator,
                            seed,
                            engine_version: ENGINE_VERSION.to_string(),
                            prng: PRNG_ALGORITHM.to_string(),
                            attempts: Attempts { taskvars: taskvar_attempt, episodes: episodes_tried },
                        },
                    });
                }
                Err(reason) => last_reason = reason,
            }
        }
    }
    Err(GeneratorError::BudgetExhausted { generator, attempts: episodes_tried, reason: last_reason })
}

type Drawn = Result<(Episode, Vec<Env>), String>;

/// One candidate episode. The outer error is a definition bug; the inner
/// one is a rejection reason.
fn draw_episode(def: &GeneratorDefinition, rng: &mut RngStream, taskvars: &Env, witness: &Term) -> Result<Drawn, DslError> {
    let n_train = rng.range(def.train_count.0 as i64, def.train_count.1 as i64) as usize;
    let n_test = rng.range(def.test_count.0 as i64, def.test_count.1 as i64) as usize;
    let mut pairs = Vec::with_capacity(n_train + n_test);
    let mut gridvars = Vec::with_capacity(n_train + n_test);
    for _ in 0..n_train + n_test {
        let mut built = None;
        let mut last = String::new();
        for _ in 0..GRID_ATTEMPTS {
            let attempt = sample_vars(rng, &def.gridvars)
                .and_then(|gv| (def.input_builder)(rng, taskvars, &gv).map(|g| (g, gv)));
            match attempt {
                Ok(ok) => {
                    built = Some(ok);
                    break;
                }
                Err(e) => last = e.to_string(),
            }
        }
        let Some((input, gv)) = built else {
            return Ok(Err(format!("input builder: {last}")));
        };
        let output = dsl::eval(witness, &input, &Env::new())?;
        pairs.push(Pair { input, output });
        gridvars.push(gv);
    }
    let test = pairs.split_off(n_train);
    let episode = Episode { train: pairs, test };

    for c in &def.constraints {
        if let Err(reason) = c.check(&episode) {
            return Ok(Err(format!("{}: {reason}", c.name())));
        }
    }
    for inv in &def.invariants {
        if episode.pairs().any(|(_, _, p)| !(inv.check)(taskvars, &p.input, &p.output)) {
            return Ok(Err(format!("invariant {} violated", inv.name)));
        }
    }
    if let Some(s) = detect_shortcuts(&episode).into_iter().find(|s| !def.intended_shortcuts.contains(s)) {
        return Ok(Err(format!("unintended {} shortcut", s.name())));
    }
    Ok(Ok((episode, gridvars)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Slot {
    name: String,
    formatter: Option<String>,
    /// Byte range of `{...}` in the line.
    span: (usize, usize),
}

/// Finds the slots of one line; `Err` carries the malformed slot text.
fn parse_slots(line: &str) -> Result<Vec<Slot>, String> {
    let mut slots = Vec::new();
    let mut rest = 0;
    while let Some(open) = line[rest..].find('{').map(|i| i + rest) {
        let Some(close) = line[open..].find('}').map(|i| i + open) else {
            return Err(line[open..].to_string());
        };
        let inner = &line[open + 1..close];
        let (name, formatter) = match inner.split_once(':') {
            Some((n, f)) => (n, Some(f.to_string())),
            None => (inner, None),
        };
        if !dsl::is_identifier(name) {
            return Err(inner.to_string());
        }
        slots.push(Slot { name: name.to_string(), formatter, span: (open, close + 1) });
        rest = close + 1;
    }
    Ok(slots)
}

/// English ordinal suffix: 1st, 2nd, 3rd, 4th, 11th, 21st.
pub fn ordinal(n: i64) -> String {
    let suffix = match (n.rem_euclid(100), n.rem_euclid(10)) {
        (11..=13, _) => "th",
        (_, 1) => "st",
        (_, 2) => "nd",
        (_, 3) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn format_slot(value: &Scalar, formatter: Option<&str>) -> Option<String> {
    match (formatter, value) {
        (None, Scalar::Int(v)) => Some(v.to_string()),
        (None, Scalar::Color(c)) => Some(c.value().to_string()),
        (None, Scalar::Direction(d)) => Some(d.name().to_string()),
        (None, Scalar::Axis(a)) => Some(a.name().to_string()),
        (Some("color_name"), Scalar::Color(c)) => Some(c.name().to_string()),
        (Some("ordinal"), Scalar::Int(v)) => Some(ordinal(*v)),
        (Some(f), Scalar::Int(v)) => {
            let word = f.strip_prefix("plural(")?.strip_suffix(')')?;
            if word.is_empty() {
                return None;
            }
            Some(if *v == 1 { word.to_string() } else { format!("{word}s") })
        }
        _ => None,
    }
}

/// Fills `{name}` and `{name:formatter}` slots from `taskvars`.
///
/// Formatters: `color_name` (Color), `ordinal` (Int) and `plural(word)`
/// (Int; renders `word` or `words`).
pub fn instantiate_template<S: AsRef<str>>(lines: &[S], taskvars: &Env) -> Result<Vec<String>, TemplateError> {
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let line = line.as_ref();
            let error = |slot: String| TemplateError { line: i + 1, slot };
            let slots = parse_slots(line).map_err(error)?;
            let mut out = String::with_capacity(line.len());
            let mut last = 0;
            for slot in slots {
                let text = &line[slot.span.0 + 1..slot.span.1 - 1];
                let value = taskvars.get(&slot.name).ok_or_else(|| error(text.to_string()))?;
                let rendered = format_slot(value, slot.formatter.as_deref()).ok_or_else(|| error(text.to_string()))?;
                out.push_str(&line[last..slot.span.0]);
                out.push_str(&rendered);
                last = slot.span.1;
            }
            out.push_str(&line[last..]);
            Ok(out)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegistryEntry {
    pub id: &'static str,
    pub summary: &'static str,
    pub constraint_kinds: Vec<&'static str>,
}

/// The compiled-in catalog, in a stable order.
pub fn registry_list() -> Vec<RegistryEntry> {
    crate::exemplars::catalog()
        .iter()
        .map(|d| RegistryEntry { id: d.id, summary: d.summary, constraint_kinds: d.constraint_kinds() })
        .collect()
}

pub fn lookup(id: &str) -> Result<&'static GeneratorDefinition, GeneratorError> {
    crate::exemplars::catalog().iter().find(|d| d.id == id).ok_or_else(|| GeneratorError::NotFound(id.to_string()))
}

/// Taskvars as a sorted map of display strings, for manifests and reports.
pub fn describe_env(env: &Env) -> BTreeMap<String, String> {
    env.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
}
