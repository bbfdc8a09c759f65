//! `polarity`: runs one experiment from a JSON config and writes a report,
//! CSV tables and a manifest into an output directory.
//!
//! Exit codes: 0 on success, 1 when `reproduce` finds different values,
//! 2 for invalid configs, locked outputs and manifest mismatches, 3 when a
//! numerical module fails.

mod config;
mod manifest;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use thiserror::Error;

use config::{Command, SCHEMA_VERSION};
use manifest::{EmittedFile, ErrorRecord, RunManifest, CONFIG_COPY, MANIFEST};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("output directory {0} is locked by another run")]
    Locked(String),
    #[error("manifest mismatch: {0}")]
    ManifestMismatch(String),
    #[error("reproduced values differ: {0}")]
    ValueMismatch(String),
    #[error("{0}")]
    Module(#[from] polarity_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::ValueMismatch(_) => 1,
            CliError::Module(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "polarity", version, about = "Polar bodies, Mahler volumes and weighted Fourier inequality checks")]
struct Cli {
    #[command(subcommand)]
    action: Action,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Replaces the seed stored in the config.
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Action {
    /// Polar body of a convex body.
    Polar(RunArgs),
    /// Volume, polar volume and Mahler volume.
    Mahler(RunArgs),
    /// Sampled supremum of the necessary condition over a body family.
    CheckCondition(RunArgs),
    /// The translated variant with `|F|` in place of `w(F)`.
    CheckNqprime(RunArgs),
    /// Comparability constant of two measures.
    Comparability(RunArgs),
    /// Reverse Hölder exponent as a function of the comparability exponent.
    EpsilonMap(RunArgs),
    /// Line, disk and segment of exponents inherited from a point.
    Region(RunArgs),
    /// Whether the sufficient condition applies.
    Classify(RunArgs),
    /// Lower bound of the transform of an indicator on the polar body.
    LowerBound(RunArgs),
    /// Restricted weak-type quantity, or its sweep over dilations.
    Rwt(RunArgs),
    /// Strong-type ratio over simple functions.
    StrongType(RunArgs),
    /// Hausdorff–Young ratio of a simple function.
    Hy(RunArgs),
    /// Search for the supremum of the generalized Mahler functional.
    Conjecture(RunArgs),
    /// Extremal Mahler volumes over a body family.
    MahlerSearch(RunArgs),
    /// Re-runs a finished run and compares its outputs.
    Reproduce {
        /// Path of the run's manifest.json.
        manifest: PathBuf,
    },
}

fn split(action: Action) -> Result<(Command, RunArgs), PathBuf> {
    Ok(match action {
        Action::Polar(a) => (Command::Polar, a),
        Action::Mahler(a) => (Command::Mahler, a),
        Action::CheckCondition(a) => (Command::CheckCondition, a),
        Action::CheckNqprime(a) => (Command::CheckNqprime, a),
        Action::Comparability(a) => (Command::Comparability, a),
        Action::EpsilonMap(a) => (Command::EpsilonMap, a),
        Action::Region(a) => (Command::Region, a),
        Action::Classify(a) => (Command::Classify, a),
        Action::LowerBound(a) => (Command::LowerBound, a),
        Action::Rwt(a) => (Command::Rwt, a),
        Action::StrongType(a) => (Command::StrongType, a),
        Action::Hy(a) => (Command::Hy, a),
        Action::Conjecture(a) => (Command::Conjecture, a),
        Action::MahlerSearch(a) => (Command::MahlerSearch, a),
        Action::Reproduce { manifest } => return Err(manifest),
    })
}

/// Caps the worker pool from `POLARITY_THREADS`.
fn init_threads() -> Result<usize, CliError> {
    if let Ok(v) = std::env::var("POLARITY_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::ConfigInvalid(format!("POLARITY_THREADS must be a positive integer, got {v:?}")))?;
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Validates, runs and records one experiment. Nothing is written when the
/// config is invalid.
fn run_experiment(command: Command, args: &RunArgs) -> Result<(), CliError> {
    let threads = init_threads()?;
    let bytes = fs::read(&args.config)
        .map_err(|e| CliError::ConfigInvalid(format!("cannot read {}: {e}", args.config.display())))?;
    let experiment = config::parse(command, &bytes, args.seed_override)?;
    fs::create_dir_all(&args.out)?;
    let _lock = manifest::DirLock::acquire(&args.out)?;
    let started = Utc::now().to_rfc3339();
    let result = run::execute(&experiment.job);
    let mut files = Vec::new();
    let mut emit = |name: &str, contents: &[u8]| -> Result<(), CliError> {
        manifest::write_atomic(&args.out.join(name), contents)?;
        files.push(EmittedFile { path: name.into(), sha256: manifest::sha256_hex(contents) });
        Ok(())
    };
    emit(CONFIG_COPY, &bytes)?;
    let (exit_code, error, outcome) = match result {
        Ok(out) => {
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "command": command.as_str(),
                "seed": experiment.seed,
                "accuracy": out.accuracy,
                "report": out.report,
            });
            emit("report.json", (serde_json::to_string_pretty(&report).expect("json") + "\n").as_bytes())?;
            for (name, contents) in &out.files {
                emit(name, contents.as_bytes())?;
            }
            (0, None, Ok(()))
        }
        Err(e) => {
            let record = ErrorRecord { name: e.name().into(), message: e.to_string() };
            (3, Some(record), Err(CliError::Module(e)))
        }
    };
    let config_path = fs::canonicalize(&args.config).unwrap_or_else(|_| args.config.clone());
    let m = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: command.as_str().into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_path: config_path.display().to_string(),
        config_sha256: manifest::sha256_hex(&bytes),
        seed: experiment.seed,
        seed_override: args.seed_override,
        started,
        finished: Utc::now().to_rfc3339(),
        threads,
        tolerances: polarity_core::tolerances::table().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        files,
        exit_code,
        error,
    };
    let text = serde_json::to_string_pretty(&m).expect("json") + "\n";
    manifest::write_atomic(&args.out.join(MANIFEST), text.as_bytes())?;
    outcome
}

/// Re-runs the manifest's config with its seed into a scratch directory and
/// compares every emitted report and table.
fn reproduce(path: &Path) -> Result<(), CliError> {
    let m = manifest::read(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let command = serde_json::from_value::<Command>(json!(m.command))
        .map_err(|_| CliError::ManifestMismatch(format!("unknown command {}", m.command)))?;
    let original = PathBuf::from(&m.config_path);
    let config = if original.exists() { original } else { dir.join(CONFIG_COPY) };
    let bytes = fs::read(&config)
        .map_err(|e| CliError::ManifestMismatch(format!("cannot read {}: {e}", config.display())))?;
    if manifest::sha256_hex(&bytes) != m.config_sha256 {
        return Err(CliError::ManifestMismatch(format!("{} no longer matches the recorded hash", config.display())));
    }
    if m.exit_code != 0 {
        return Err(CliError::ManifestMismatch(format!("the recorded run failed with exit code {}", m.exit_code)));
    }
    let rtol = m.tolerances.get("reproduce_rtol").copied().unwrap_or(polarity_core::tolerances::REPRODUCE_RTOL);
    let scratch = tempfile::tempdir()?;
    let args = RunArgs { config: config.clone(), out: scratch.path().to_path_buf(), seed_override: Some(m.seed) };
    run_experiment(command, &args)?;
    for f in m.files.iter().filter(|f| f.path != CONFIG_COPY) {
        let old = fs::read_to_string(dir.join(&f.path))
            .map_err(|e| CliError::ManifestMismatch(format!("cannot read {}: {e}", f.path)))?;
        let new = fs::read_to_string(scratch.path().join(&f.path))
            .map_err(|_| CliError::ValueMismatch(format!("{} was not produced", f.path)))?;
        let diff = if f.path.ends_with(".csv") {
            manifest::compare_csv(&old, &new, rtol)
        } else {
            let a: serde_json::Value = serde_json::from_str(&old)
                .map_err(|e| CliError::ManifestMismatch(format!("{} is not JSON: {e}", f.path)))?;
            let b: serde_json::Value = serde_json::from_str(&new).expect("freshly written JSON");
            manifest::compare_json(&a, &b, rtol, "")
        };
        if let Some(d) = diff {
            return Err(CliError::ValueMismatch(format!("{}: {d}", f.path)));
        }
    }
    println!("reproduced {} file(s) from {}", m.files.len() - 1, path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match split(cli.action) {
        Ok((command, args)) => run_experiment(command, &args).map(|()| {
            println!("{} finished, outputs in {}", command.as_str(), args.out.display());
        }),
        Err(manifest) => reproduce(&manifest),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
