//! On-disk dataset layout.
//!
//! ```text
//! DIR/
//!   manifest.json
//!   <generator_id>__<seed>.json            ARC-JSON episode
//!   <generator_id>__<seed>.witness.txt     optional, closed DSL program
//!   <generator_id>__<seed>.reasoning.txt   optional, [input] / [transform]
//! ```
//!
//! Every file is written to a temporary name and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{render_source, Env, DSL_VERSION};
use crate::generator::{create_task, Attempts, GeneratorDefinition, GeneratorError, TaskSample, ENGINE_VERSION};
use crate::grid::{parse_arc_json, serialize_arc_json, ArcJsonError, Episode};
use crate::sampler::PRNG_ALGORITHM;

pub const MANIFEST: &str = "manifest.json";
pub const REPORT: &str = "verification_report.json";
pub const WITNESS_SUFFIX: &str = ".witness.txt";
pub const REASONING_SUFFIX: &str = ".reasoning.txt";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no {MANIFEST} in {0}")]
    MissingManifest(PathBuf),
    #[error("sidecar {0} has no matching sample file")]
    OrphanSidecar(PathBuf),
    #[error("malformed manifest {path}: {message}")]
    MalformedManifest { path: PathBuf, message: String },
    #[error("sample {id}: {source}")]
    MalformedSample { id: String, source: ArcJsonError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

pub fn sample_id(generator: &str, seed: u64) -> String {
    format!("{generator}__{seed}")
}

/// Generator id encoded in a sample id, if it follows the naming scheme.
pub fn generator_from_id(id: &str) -> Option<&str> {
    let (generator, seed) = id.rsplit_once("__")?;
    seed.parse::<u64>().ok().map(|_| generator)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub generator: String,
    pub seed: u64,
    pub taskvars: Env,
    pub gridvars: Vec<Env>,
    pub attempts: Attempts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub engine_version: String,
    pub dsl_version: String,
    pub prng: String,
    pub generators: Vec<String>,
    pub samples: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn for_samples(samples: &[TaskSample]) -> Manifest {
        let mut generators: Vec<String> = samples.iter().map(|s| s.provenance.generator.clone()).collect();
        generators.dedup();
        Manifest {
            engine_version: ENGINE_VERSION.to_string(),
            dsl_version: DSL_VERSION.to_string(),
            prng: PRNG_ALGORITHM.to_string(),
            generators,
            samples: samples
                .iter()
                .map(|s| ManifestEntry {
                    id: sample_id(&s.provenance.generator, s.provenance.seed),
                    generator: s.provenance.generator.clone(),
                    seed: s.provenance.seed,
                    taskvars: s.taskvars.clone(),
                    gridvars: s.gridvars.clone(),
                    attempts: s.provenance.attempts,
                })
                .collect(),
        }
    }

    pub fn entry(&self, id: &str) -> Option<&ManifestEntry> {
        self.samples.iter().find(|e| e.id == id)
    }
}

/// Samples `count` tasks per definition with seeds `seed, seed + 1, ...`,
/// in parallel. Output order is definition order, then seed order.
pub fn sample_many(
    defs: &[&GeneratorDefinition],
    count: u64,
    seed: u64,
) -> Result<Vec<TaskSample>, GeneratorError> {
    let jobs: Vec<(&GeneratorDefinition, u64)> =
        defs.iter().flat_map(|d| (0..count).map(move |i| (*d, seed.wrapping_add(i)))).collect();
    jobs.par_iter().map(|(d, s)| create_task(d, *s)).collect()
}

/// Text of a reasoning sidecar.
pub fn reasoning_text(input: &[String], transform: &[String]) -> String {
    let mut out = String::from("[input]\n");
    for line in input {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("\n[transform]\n");
    for line in transform {
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Splits a reasoning sidecar into its input and transform lines.
pub fn parse_reasoning(text: &str) -> Option<(Vec<String>, Vec<String>)> {
    let rest = text.strip_prefix("[input]\n")?;
    let (input, transform) = rest.split_once("\n[transform]\n")?;
    let lines = |s: &str| s.lines().filter(|l| !l.is_empty()).map(str::to_string).collect();
    Some((lines(input), lines(transform)))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WriteOptions {
    pub witness: bool,
    pub reasoning: bool,
}

/// Writes samples, their sidecars and the manifest into `dir`.
pub fn write_dataset(dir: &Path, samples: &[TaskSample], opts: WriteOptions) -> Result<Manifest, DatasetError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    samples.par_iter().try_for_each(|s| {
        let stem = sample_id(&s.provenance.generator, s.provenance.seed);
        let write = |suffix: &str, bytes: &[u8]| {
            let path = dir.join(format!("{stem}{suffix}"));
            atomic_write(&path, bytes).map_err(io_err(&path))
        };
        write(".json", &serialize_arc_json(&s.episode))?;
        if opts.witness {
            write(WITNESS_SUFFIX, format!("{}\n", render_source(&s.witness)).as_bytes())?;
        }
        if opts.reasoning {
            write(REASONING_SUFFIX, reasoning_text(&s.input_reasoning, &s.transform_reasoning).as_bytes())?;
        }
        Ok(())
    })?;
    let manifest = Manifest::for_samples(samples);
    let path = dir.join(MANIFEST);
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    atomic_write(&path, &bytes).map_err(io_err(&path))?;
    Ok(manifest)
}

/// Raw files of one sample.
#[derive(Debug, Clone)]
pub struct SampleFiles {
    pub id: String,
    pub json: Vec<u8>,
    pub witness: Option<String>,
    pub reasoning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Option<Manifest>,
    /// Sorted by id.
    pub samples: Vec<SampleFiles>,
}

impl Dataset {
    /// Reads a dataset directory. A manifest is optional here so that plain
    /// ARC-JSON collections can be analyzed; see [`Dataset::require_manifest`].
    pub fn load(dir: &Path) -> Result<Dataset, DatasetError> {
        let mut jsons = BTreeMap::new();
        let mut witnesses = BTreeMap::new();
        let mut reasonings = BTreeMap::new();
        let mut manifest = None;
        for entry in fs::read_dir(dir).map_err(io_err(dir))? {
            let entry = entry.map_err(io_err(dir))?;
            let path = entry.path();
            if !path.is_file() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') || name == REPORT {
                continue;
            }
            let read_text = |p: &Path| fs::read_to_string(p).map_err(io_err(p));
            if name == MANIFEST {
                let text = read_text(&path)?;
                manifest = Some(serde_json::from_str::<Manifest>(&text).map_err(|e| {
                    DatasetError::MalformedManifest { path: path.clone(), message: e.to_string() }
                })?);
            } else if let Some(stem) = name.strip_suffix(WITNESS_SUFFIX) {
                witnesses.insert(stem.to_string(), (path.clone(), read_text(&path)?));
            } else if let Some(stem) = name.strip_suffix(REASONING_SUFFIX) {
                reasonings.insert(stem.to_string(), (path.clone(), read_text(&path)?));
            } else if let Some(stem) = name.strip_suffix(".json") {
                jsons.insert(stem.to_string(), fs::read(&path).map_err(io_err(&path))?);
            }
        }
        if let Some((path, _)) =
            witnesses.iter().chain(&reasonings).filter(|(stem, _)| !jsons.contains_key(*stem)).map(|(_, v)| v).min()
        {
            return Err(DatasetError::OrphanSidecar(path.clone()));
        }
        let samples = jsons
            .into_iter()
            .map(|(id, json)| SampleFiles {
                witness: witnesses.remove(&id).map(|(_, t)| t),
                reasoning: reasonings.remove(&id).map(|(_, t)| t),
                id,
                json,
            })
            .collect();
        Ok(Dataset { root: dir.to_path_buf(), manifest, samples })
    }

    pub fn require_manifest(&self) -> Result<&Manifest, DatasetError> {
        self.manifest.as_ref().ok_or_else(|| DatasetError::MissingManifest(self.root.clone()))
    }

    /// Generator of a sample: the manifest entry if any, else the file name.
    pub fn generator_of(&self, id: &str) -> String {
        self.manifest
            .as_ref()
            .and_then(|m| m.entry(id))
            .map(|e| e.generator.clone())
            .or_else(|| generator_from_id(id).map(str::to_string))
            .unwrap_or_else(|| "unknown".to_string())
    }

    /// Parses every sample; fails on the first malformed one.
    pub fn episodes(&self) -> Result<Vec<LoadedEpisode>, DatasetError> {
        self.samples
            .par_iter()
            .map(|s| {
                let episode = parse_arc_json(&s.json)
                    .map_err(|source| DatasetError::MalformedSample { id: s.id.clone(), source })?;
                let entry = self.manifest.as_ref().and_then(|m| m.entry(&s.id));
                Ok(LoadedEpisode {
                    id: s.id.clone(),
                    generator: self.generator_of(&s.id),
                    taskvars: entry.map(|e| e.taskvars.clone()),
                    episode,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedEpisode {
    pub id: String,
    pub generator: String,
    pub taskvars: Option<Env>,
    pub episode: Episode,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exemplars::{catalog, G1, G5};
    use crate::generator::lookup;

    #[test]
    fn ids_round_trip() {
        assert_eq!(sample_id(G1, 42), "tgi.g1.stacked_segments__42");
        assert_eq!(generator_from_id("tgi.g1.stacked_segments__42"), Some(G1));
        assert_eq!(generator_from_id("task"), None);
        assert_eq!(generator_from_id("a__b"), None);
    }

    #[test]
    fn reasoning_round_trip() {
        let input = vec!["one".to_string(), "two".to_string()];
        let transform = vec!["three".to_string()];
        let text = reasoning_text(&input, &transform);
        assert_eq!(text, "[input]\none\ntwo\n\n[transform]\nthree\n");
        assert_eq!(parse_reasoning(&text), Some((input, transform)));
        assert_eq!(parse_reasoning("nonsense"), None);
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let defs: Vec<&GeneratorDefinition> = catalog().iter().collect();
        let samples = sample_many(&defs, 2, 3).unwrap();
        assert_eq!(samples.len(), 12);
        let manifest = write_dataset(dir.path(), &samples, WriteOptions { witness: true, reasoning: true }).unwrap();
        assert_eq!(manifest.generators.len(), 6);
        let ds = Dataset::load(dir.path()).unwrap();
        assert_eq!(ds.samples.len(), 12);
        assert!(ds.samples.iter().all(|s| s.witness.is_some() && s.reasoning.is_some()));
        assert_eq!(ds.require_manifest().unwrap(), &manifest);
        let episodes = ds.episodes().unwrap();
        let original = samples.iter().find(|s| s.provenance.generator == G5 && s.provenance.seed == 4).unwrap();
        let loaded = episodes.iter().find(|e| e.id == sample_id(G5, 4)).unwrap();
        assert_eq!(loaded.episode, original.episode);
        assert_eq!(loaded.taskvars.as_ref(), Some(&original.taskvars));
        assert!(fs::read_dir(dir.path()).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
    }

    #[test]
    fn missing_manifest_and_orphans() {
        let dir = tempfile::tempdir().unwrap();
        let ds = Dataset::load(dir.path()).unwrap();
        assert!(matches!(ds.require_manifest(), Err(DatasetError::MissingManifest(_))));
        fs::write(dir.path().join("x__1.witness.txt"), "(input)\n").unwrap();
        assert!(matches!(Dataset::load(dir.path()), Err(DatasetError::OrphanSidecar(_))));
    }

    #[test]
    fn plain_arc_collections_load() {
        let dir = tempfile::tempdir().unwrap();
        let s = create_task(lookup(G1).unwrap(), 0).unwrap();
        fs::write(dir.path().join("some_task.json"), serialize_arc_json(&s.episode)).unwrap();
        let ds = Dataset::load(dir.path()).unwrap();
        assert!(ds.manifest.is_none());
        assert_eq!(ds.generator_of("some_task"), "unknown");
        assert_eq!(ds.episodes().unwrap()[0].episode, s.episode);
    }
}
