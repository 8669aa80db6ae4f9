//! A small parameter sweep from a config file, written as CSV.
//!
//! `cargo run --release --example sweep -- configs/sweep.toml [workers]`

use std::path::PathBuf;

use aqc_shield::runner::{load_config, run_sweep};

fn main() -> aqc_shield::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/sweep.toml"));
    let workers = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let cfg = load_config(&path)?;
    let result = run_sweep(&cfg, workers)?;
    print!("{}", result.to_csv());
    Ok(())
}
