//! Batch experiment runner for the hidden-phase model.
//!
//! `hv run <config.json>` executes one experiment and writes `report.json`
//! plus CSV tables; `hv list` describes the experiment kinds.

pub mod config;
pub mod experiments;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{ConfigError, ExperimentConfig, Kind};
pub use experiments::{run_experiment, Criterion, Outcome, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hv", version, about = "Hidden-phase model experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory for report.json and CSV tables.
        #[arg(long, default_value = "hv-out")]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides a config key, e.g. `params.samples=1000`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// List experiment kinds.
    List {
        #[arg(long)]
        json: bool,
    },
}

/// Caps the global worker pool from `HV_THREADS`, if set.
fn configure_threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("HV_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            ConfigError(format!("HV_THREADS must be a positive integer, got `{v}`"))
        })?;
    // a pool built earlier in this process wins; that is fine for tests
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn listing() -> Value {
    Value::Array(
        Kind::ALL
            .iter()
            .map(|k| json!({"kind": k.name(), "required": k.required(), "description": k.description()}))
            .collect(),
    )
}

fn print_listing(json: bool, out: &mut impl Write) -> std::io::Result<()> {
    if json {
        return writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&listing()).expect("listing serializes")
        );
    }
    writeln!(out, "{:<13} {:<22} description", "kind", "required params")?;
    for k in Kind::ALL {
        let req = if k.required().is_empty() {
            "-".to_string()
        } else {
            k.required().join(",")
        };
        writeln!(out, "{:<13} {:<22} {}", k.name(), req, k.description())?;
    }
    Ok(())
}

/// Writes `report.json` and the tables; returns the report.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &Outcome,
) -> Result<Value, ConfigError> {
    std::fs::create_dir_all(dir).map_err(|e| ConfigError(format!("{}: {e}", dir.display())))?;
    for t in &outcome.tables {
        let path = dir.join(&t.file);
        std::fs::write(&path, t.to_csv())
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    }
    let report = json!({
        "config": cfg.resolved(),
        "metrics": outcome.metrics,
        "criteria": outcome.criteria,
        "pass": outcome.pass(),
        "files": outcome.tables.iter().map(|t| t.file.clone()).collect::<Vec<_>>(),
    });
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    Ok(report)
}

fn run_command(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    sets: &[String],
) -> Result<bool, ConfigError> {
    configure_threads()?;
    let cfg = ExperimentConfig::load(config, seed, sets)?;
    let outcome = run_experiment(&cfg)?;
    write_outputs(out, &cfg, &outcome)?;
    for c in &outcome.criteria {
        println!(
            "{} {:<28} value={:e} threshold={:e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    Ok(outcome.pass())
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::List { json } => match print_listing(json, &mut std::io::stdout().lock()) {
            Ok(()) => EXIT_PASS,
            Err(_) => EXIT_USAGE,
        },
        Command::Run {
            config,
            out,
            seed,
            sets,
        } => match run_command(&config, &out, seed, &sets) {
            Ok(true) => EXIT_PASS,
            Ok(false) => EXIT_FAILED,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        },
    }
}
