//! `taskforge`: sample, verify, render, analyze and score task datasets.
//!
//! Exit codes: 0 success, 1 check or score failure, 2 usage, 3 I/O.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use taskforge::analysis::{diversity, extract_features, features_csv, size_heatmap, Role};
use taskforge::dataset::{atomic_write, sample_many, write_dataset, Dataset, DatasetError, WriteOptions, REPORT};
use taskforge::generator::{lookup, registry_list, GeneratorDefinition, GeneratorError};
use taskforge::grid::parse_arc_json;
use taskforge::score::{parse_predictions, score, ScoreOptions};
use taskforge::verify::verify_dataset;

mod render;

#[derive(Parser)]
#[command(name = "taskforge", version, about = "Procedural ARC-style task families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample K episodes per generator with seeds S, S+1, ...
    Sample {
        /// Generator id, or `all`.
        #[arg(long)]
        generator: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        with_witness: bool,
        #[arg(long)]
        with_reasoning: bool,
    },
    /// Verify every sample of a dataset and write verification_report.json.
    Verify {
        #[arg(long)]
        dataset: PathBuf,
        /// Treat flagged checks as failures.
        #[arg(long)]
        strict: bool,
    },
    /// Render one ARC-JSON episode.
    Render {
        #[arg(long)]
        task: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        /// Output path, or `-` for stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Grid-size heatmap, per-grid features and uniqueness measures.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        heatmap: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        diversity: Option<PathBuf>,
        /// Which grids the heatmap counts.
        #[arg(long, value_enum, default_value = "inputs")]
        grids: Grids,
    },
    /// Exact-match scoring of a prediction file.
    Score {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fail on samples without a prediction instead of counting them unsolved.
        #[arg(long)]
        strict_predictions: bool,
        /// Fail on predictions for ids absent from the dataset.
        #[arg(long)]
        strict_ids: bool,
        /// Flag episodes with more cells than this (a size proxy, not a token count).
        #[arg(long)]
        max_cells: Option<usize>,
    },
    /// List the compiled-in generators.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Svg,
    Ansi,
}

#[derive(Clone, Copy, ValueEnum)]
enum Grids {
    Inputs,
    Outputs,
}

enum Failure {
    Check(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => Failure::Io(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if path == Path::new("-") {
        return io::stdout().write_all(bytes).map_err(|e| Failure::Io(e.to_string()));
    }
    atomic_write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sample { generator, count, seed, out, with_witness, with_reasoning } => {
            let defs: Vec<&GeneratorDefinition> = if generator == "all" {
                taskforge::exemplars::catalog().iter().collect()
            } else {
                vec![lookup(&generator).map_err(|e| Failure::Usage(e.to_string()))?]
            };
            if seed.checked_add(count - 1).is_none() {
                return Err(Failure::Usage("seed range overflows u64".into()));
            }
            let samples = sample_many(&defs, count, seed).map_err(|e| match e {
                GeneratorError::NotFound(_) => Failure::Usage(e.to_string()),
                other => Failure::Check(other.to_string()),
            })?;
            write_dataset(&out, &samples, WriteOptions { witness: with_witness, reasoning: with_reasoning })?;
            println!("wrote {} samples to {}", samples.len(), out.display());
            Ok(())
        }
        Command::Verify { dataset, strict } => {
            let report = verify_dataset(&dataset, strict)?;
            for r in report.samples.iter().filter(|r| !r.passed()) {
                for c in &r.checks {
                    if c.status != taskforge::verify::CheckStatus::Pass {
                        println!("FAIL {} {}:{} {}", r.sample, c.kind.name(), c.name, c.detail);
                    }
                }
            }
            write_file(&dataset.join(REPORT), &report.to_json())?;
            let s = &report.summary;
            println!("{}/{} passed, {} failed, {} flagged", s.passed, s.total, s.failed, s.flagged);
            if s.failed > 0 {
                return Err(Failure::Check(format!("{} sample(s) failed verification", s.failed)));
            }
            Ok(())
        }
        Command::Render { task, format, out } => {
            let episode = parse_arc_json(&read_file(&task)?)
                .map_err(|e| Failure::Check(format!("{}: {e}", task.display())))?;
            let text = match format {
                Format::Svg => render::svg(&episode),
                Format::Ansi => render::ansi(&episode),
            };
            write_file(&out, text.as_bytes())
        }
        Command::Stats { dataset, heatmap, features, diversity: div_out, grids } => {
            let episodes = Dataset::load(&dataset)?.episodes()?;
            let role = match grids {
                Grids::Inputs => Role::Input,
                Grids::Outputs => Role::Output,
            };
            let map = size_heatmap(&episodes, role);
            if let Some(path) = heatmap {
                write_file(&path, map.to_csv().as_bytes())?;
            }
            if let Some(path) = features {
                write_file(&path, features_csv(&extract_features(&episodes)).as_bytes())?;
            }
            if let Some(path) = div_out {
                write_file(&path, &diversity(&episodes).to_json())?;
            }
            let share = if map.total() == 0 { 0.0 } else { map.in_window() as f64 / map.total() as f64 };
            println!(
                "{} samples, {} {} grids, {} in the 5x5..30x30 window ({:.1}%)",
                episodes.len(),
                map.total(),
                role.name(),
                map.in_window(),
                100.0 * share
            );
            Ok(())
        }
        Command::Score { dataset, predictions, out, strict_predictions, strict_ids, max_cells } => {
            let episodes = Dataset::load(&dataset)?.episodes()?;
            let preds = parse_predictions(&read_file(&predictions)?).map_err(|e| Failure::Check(e.to_string()))?;
            let opts = ScoreOptions { strict_predictions, strict_unknown: strict_ids, max_cells };
            let table = score(&episodes, &preds, opts).map_err(|e| Failure::Check(e.to_string()))?;
            for w in &table.warnings {
                eprintln!("warning: {w}");
            }
            fs::create_dir_all(&out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
            write_file(&out.join("scores.csv"), table.to_csv().as_bytes())?;
            write_file(&out.join("overall.json"), &table.overall_json())?;
            println!("solved {}/{} (accuracy {})", table.solved, table.total, table.overall_accuracy);
            Ok(())
        }
        Command::List => {
            for e in registry_list() {
                println!("{}\t{}\t{}", e.id, e.constraint_kinds.join(","), e.summary);
            }
            Ok(())
        }
    }
}
