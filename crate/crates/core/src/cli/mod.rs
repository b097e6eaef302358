//! Config-driven runs: validation, dispatch and output files.
//!
//! A run writes `<dir>/<experiment>.csv` and `<dir>/summary.json`, where
//! `<dir>` is `LAB_OUTPUT_DIR` when set and the config's `output_dir`
//! otherwise.

mod config;
mod experiments;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

pub use config::{parse_sequence, validate, Experiment, FunctionSpec, ParamSpec, ParamValue, RunConfig, ValidationError};
pub use experiments::{run_experiment, ComputeError, Outcome};

pub const OUTPUT_ENV: &str = "LAB_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Invalid(Vec<ValidationError>),
    Compute(ComputeError),
    Io(io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Invalid(_) => EXIT_INVALID,
            RunError::Compute(_) | RunError::Io(_) => EXIT_COMPUTE,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Invalid(errs) => {
                let lines: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
                f.write_str(&lines.join("\n"))
            }
            RunError::Compute(e) => write!(f, "computation failed: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub csv: PathBuf,
    pub summary: Value,
}

/// The directory a run writes to.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => cfg.output_dir.clone(),
    }
}

fn write_csv(path: &Path, out: &Outcome) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&out.header)?;
    for row in &out.rows {
        w.write_record(row)?;
    }
    w.flush()
}

/// Runs a validated config into `dir`. A computation error still leaves a
/// summary.json naming it.
pub fn run_in(cfg: &RunConfig, dir: &Path) -> Result<RunSummary, RunError> {
    fs::create_dir_all(dir)?;
    let started = Instant::now();
    let outcome = run_experiment(cfg);
    let wall = started.elapsed().as_secs_f64();
    let mut summary = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment,
        "config": cfg,
        "seed": cfg.seed(),
        "wall_time_s": wall,
    });
    let csv = dir.join(format!("{}.csv", cfg.experiment));
    let result = match outcome {
        Ok(out) => {
            write_csv(&csv, &out)?;
            for (name, body) in &out.extra {
                fs::write(dir.join(name), body)?;
            }
            summary["status"] = json!("ok");
            summary["csv"] = json!(csv.file_name().and_then(|n| n.to_str()));
            summary["result"] = out.result;
            Ok(())
        }
        Err(e) => {
            summary["status"] = json!("error");
            summary["error"] = json!({ "name": e.name, "message": e.message });
            Err(e)
        }
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary).expect("json") + "\n")?;
    result.map_err(RunError::Compute)?;
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        csv,
        summary,
    })
}

pub fn load(path: &Path) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(path)?;
    validate(&text).map_err(RunError::Invalid)
}

/// Loads, validates and runs a config file, honouring `LAB_OUTPUT_DIR`.
pub fn run_file(path: &Path) -> Result<RunSummary, RunError> {
    let cfg = load(path)?;
    let dir = output_dir(&cfg);
    run_in(&cfg, &dir)
}

/// One block per experiment: name, description and parameter table.
pub fn experiment_listing() -> String {
    let mut s = String::new();
    for e in Experiment::ALL {
        s += &format!("{:<15} {}\n", e.name(), e.describe());
        s += &format!("{:<15}   function (default {})\n", "", e.default_function());
        for p in e.params() {
            let dflt = match p.default {
                config::Dflt::Num(x) if x != 0.0 && !(1e-3..1e6).contains(&x.abs()) => format!("{x:e}"),
                config::Dflt::Num(x) => x.to_string(),
                config::Dflt::Text(t) => t.to_string(),
            };
            s += &format!("{:<15}   {:<20} {} (default {})\n", "", p.name, p.help, dflt);
        }
    }
    s
}
