use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aqc_shield::runner::{
    code_listing, gap_csv, gap_scan, load_config, run_experiment, run_sweep, verify, write_report, write_sweep,
    ExitStatus, Overrides,
};
use aqc_shield::Result;

#[derive(Parser)]
#[command(name = "aqc-shield", version, about = "Decoupling-protected adiabatic quantum computation")]
struct Cli {
    /// Bath seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides AQC_SHIELD_OUT and the config).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,
    /// Integrator tolerance, overriding the config.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protected computation and write report.csv / report.json.
    Simulate { config: PathBuf },
    /// Run every point of the config's [sweep] section.
    Sweep { config: PathBuf },
    /// Scan the spectrum of H_ad(s) and write gap.csv.
    Gap { config: PathBuf },
    /// Print the codewords and logical operators of the [[n, n-2, 2]] code.
    Code {
        #[arg(long)]
        n: usize,
    },
    /// Run the self-check suite.
    Verify,
}

fn run(cli: Cli) -> Result<ExitStatus> {
    let overrides = Overrides {
        seed: cli.seed,
        tolerance: cli.tolerance,
        out_dir: cli.out_dir,
    };
    let load = |path: &PathBuf| {
        let mut cfg = load_config(path)?;
        overrides.apply(&mut cfg)?;
        Ok::<_, aqc_shield::Error>(cfg)
    };
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load(&config)?;
            let outcome = run_experiment(&cfg)?;
            for path in write_report(&overrides.output_dir(&cfg), &cfg.output, &outcome.report)? {
                log::info!("wrote {}", path.display());
            }
            let status = outcome.status();
            if status == ExitStatus::VerdictFailed {
                log::warn!("bound verdicts failed: {:?}", outcome.report.verdicts);
            }
            Ok(status)
        }
        Command::Sweep { config } => {
            let cfg = load(&config)?;
            let result = run_sweep(&cfg, cli.parallel)?;
            for path in write_sweep(&overrides.output_dir(&cfg), &cfg, &result)? {
                log::info!("wrote {}", path.display());
            }
            Ok(if result.any_error() {
                ExitStatus::ExecutionError
            } else if result.any_failed_verdict() {
                ExitStatus::VerdictFailed
            } else {
                ExitStatus::Success
            })
        }
        Command::Gap { config } => {
            let cfg = load(&config)?;
            let report = gap_scan(&cfg)?;
            let dir = overrides.output_dir(&cfg);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("gap.csv");
            std::fs::write(&path, gap_csv(&report))?;
            log::info!("wrote {}", path.display());
            println!("min gap {:.10} at s = {:.8}", report.gap, report.s_star);
            Ok(ExitStatus::Success)
        }
        Command::Code { n } => {
            print!("{}", code_listing(n)?);
            Ok(ExitStatus::Success)
        }
        Command::Verify => {
            let suite = verify()?;
            println!("{suite}");
            Ok(if suite.all_pass() {
                ExitStatus::Success
            } else {
                ExitStatus::VerdictFailed
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    let status = run(cli).unwrap_or_else(|e| {
        log::error!("{e}");
        ExitStatus::ExecutionError
    });
    ExitCode::from(status.code() as u8)
}
