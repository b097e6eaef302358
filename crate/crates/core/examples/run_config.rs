//! Runs a JSON experiment config the way the binary does, into a directory
//! given on the command line.
use std::path::PathBuf;

use ergolab::cli;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| "crates/core/examples/configs/criterion.json".into());
    let out: PathBuf = args.next().unwrap_or_else(|| "output/run_config".into()).into();
    let cfg = cli::validate(&std::fs::read_to_string(&config)?).map_err(|errs| {
        errs.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n")
    })?;
    let run = cli::run_in(&cfg, &out).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&run.summary["result"])?);
    println!("wrote {}", run.csv.display());
    Ok(())
}
