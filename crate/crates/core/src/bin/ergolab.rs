use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergolab::cli;

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Subsequence ergodic averages for circle rotations")]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a JSON config; writes <experiment>.csv and summary.json
    Run { config: PathBuf },
    /// Check a JSON config without running it
    Validate { config: PathBuf },
    /// List experiments and their parameters
    ListExperiments,
}

fn main() -> ExitCode {
    let code = match Args::parse().cmd {
        Cmd::Run { config } => match cli::run_file(&config) {
            Ok(r) => {
                println!("{}", r.csv.display());
                println!("{}", r.dir.join("summary.json").display());
                cli::EXIT_OK
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Cmd::Validate { config } => match cli::load(&config) {
            Ok(cfg) => {
                println!("ok: {} -> {}", cfg.experiment, cli::output_dir(&cfg).display());
                cli::EXIT_OK
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Cmd::ListExperiments => {
            print!("{}", cli::experiment_listing());
            cli::EXIT_OK
        }
    };
    ExitCode::from(code as u8)
}
