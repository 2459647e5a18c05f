//! `hriot`: run protocol/seed sweeps over a scenario file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hriot_core::experiment::{run_experiment, ExperimentError};
use hriot_core::{parse_config, Protocol, ScenarioConfig, SimError};

const EXIT_CONFIG: u8 = 1;
const EXIT_IO: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "hriot", version, about = "Fog-based hierarchical IoT routing simulator")]
struct Args {
    /// Scenario file (`key = value` lines). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Protocols to run: HRIOT, DIRECT, EECRP_LIKE, ERGID_LIKE.
    #[arg(long, value_delimiter = ',', default_value = "HRIOT")]
    protocol: Vec<Protocol>,

    /// Seeds to run; defaults to the scenario's `seed`.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,

    /// Overrides the scenario's `rounds`.
    #[arg(long)]
    rounds: Option<u64>,

    /// Output directory for rounds.csv, summary.csv and report.txt.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load(args: &Args) -> Result<ScenarioConfig, ExitCode> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            eprintln!("error: cannot read {}: {e}", path.display());
            ExitCode::from(EXIT_IO)
        })?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })?;
    if let Some(r) = args.rounds {
        cfg.rounds = r;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Bad flags count as configuration errors; exit code 2 is kept for I/O.
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match load(&args) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let seeds = if args.seeds.is_empty() {
        vec![cfg.seed]
    } else {
        args.seeds.clone()
    };
    match run_experiment(&cfg, &args.protocol, &seeds, &args.out) {
        Ok(out) => {
            print!("{}", hriot_core::experiment::summary_csv(&out.runs));
            log::info!("wrote {}", out.rounds_csv.display());
            ExitCode::SUCCESS
        }
        Err(ExperimentError::Io { path, source }) => {
            eprintln!("error: cannot write {}: {source}", path.display());
            ExitCode::from(EXIT_IO)
        }
        Err(ExperimentError::Sim(SimError::Config(e))) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(ExperimentError::Sim(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
