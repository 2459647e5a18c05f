//! Protocol/seed sweeps and their on-disk artifacts.
//!
//! Output files, all written after every run has finished:
//!
//! * `rounds.csv`: `protocol,seed,round,alive,sent,delivered,pdr,mean_delay_s,mean_response_s,energy_j`,
//!   one row per executed round. Traffic columns are per round; `energy_j`
//!   is cumulative.
//! * `summary.csv`: one row per `(protocol, seed)`.
//! * `report.txt`: the effective configuration, the fog tree parent list and
//!   the summary table.
//!
//! Numbers use fixed decimals (`pdr` 6 places, seconds and joules 9 places),
//! independent of locale. Undefined ratios (no traffic, nothing delivered)
//! are written as `NA`; a run without device deaths reports `none`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::sim::{run_scenario, Protocol, RunOutput, SimError};

pub const ROUNDS_HEADER: &str = "protocol,seed,round,alive,sent,delivered,pdr,mean_delay_s,mean_response_s,energy_j";
pub const SUMMARY_HEADER: &str =
    "protocol,seed,rounds_run,sent,delivered,pdr,mean_delay_s,mean_response_s,first_node_death_round,energy_j";

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub runs: Vec<RunOutput>,
    pub rounds_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub report: PathBuf,
}

fn opt(v: Option<f64>, places: usize) -> String {
    match v {
        Some(x) => format!("{x:.places$}"),
        None => "NA".to_string(),
    }
}

pub fn rounds_csv(runs: &[RunOutput]) -> String {
    let mut out = String::from(ROUNDS_HEADER);
    out.push('\n');
    for run in runs {
        for r in &run.ledger.rounds {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{:.9}",
                run.protocol,
                run.seed,
                r.round,
                r.alive,
                r.sent,
                r.delivered,
                opt(r.pdr(), 6),
                opt(r.mean_delay(), 9),
                opt(r.mean_response(), 9),
                r.energy_consumed
            );
        }
    }
    out
}

pub fn summary_csv(runs: &[RunOutput]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for run in runs {
        let s = &run.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.9}",
            run.protocol,
            run.seed,
            s.rounds_run,
            s.sent,
            s.delivered,
            opt(s.pdr, 6),
            opt(s.mean_delay, 9),
            opt(s.mean_response, 9),
            s.lifetime
                .first_node_death_round
                .map_or_else(|| "none".to_string(), |r| r.to_string()),
            s.energy_consumed
        );
    }
    out
}

pub fn report(cfg: &ScenarioConfig, runs: &[RunOutput]) -> String {
    let mut out = String::new();
    out.push_str("# effective configuration\n");
    out.push_str(&cfg.to_text());
    out.push_str("\n# fog tree (fog parent depth)\n");
    if let Some(run) = runs.first() {
        let _ = writeln!(out, "cloud {} branching {}", run.tree.root(), run.tree.branching());
        out.push_str(&run.tree.parent_list());
    }
    out.push_str("\n# summary\n");
    out.push_str(&summary_csv(runs));
    out
}

fn create(path: &Path) -> Result<File, ExperimentError> {
    File::create(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_all(mut file: File, path: &Path, text: &str) -> Result<(), ExperimentError> {
    file.write_all(text.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|source| ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Runs every `(protocol, seed)` pair. Runs are independent and execute in
/// parallel; results are ordered by protocol, then seed.
pub fn run_sweep(cfg: &ScenarioConfig, protocols: &[Protocol], seeds: &[u64]) -> Result<Vec<RunOutput>, SimError> {
    cfg.validate()?;
    let mut protocols = protocols.to_vec();
    protocols.sort();
    protocols.dedup();
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    let jobs: Vec<(Protocol, u64)> = protocols
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    jobs.par_iter().map(|&(p, s)| run_scenario(cfg, p, s)).collect()
}

/// Runs the sweep and writes `rounds.csv`, `summary.csv` and `report.txt`
/// into `out_dir`. The output files are created before any simulation
/// starts, so an unwritable directory fails fast.
pub fn run_experiment(
    cfg: &ScenarioConfig,
    protocols: &[Protocol],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<ExperimentOutput, ExperimentError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ExperimentError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let rounds_path = out_dir.join("rounds.csv");
    let summary_path = out_dir.join("summary.csv");
    let report_path = out_dir.join("report.txt");
    let files = (create(&rounds_path)?, create(&summary_path)?, create(&report_path)?);

    let runs = run_sweep(cfg, protocols, seeds)?;

    write_all(files.0, &rounds_path, &rounds_csv(&runs))?;
    write_all(files.1, &summary_path, &summary_csv(&runs))?;
    write_all(files.2, &report_path, &report(cfg, &runs))?;
    Ok(ExperimentOutput {
        runs,
        rounds_csv: rounds_path,
        summary_csv: summary_path,
        report: report_path,
    })
}
