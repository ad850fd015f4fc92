//! Command-line experiment runner: TOML config in, JSON report and CSV side
//! files out.

mod config;
mod report;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

pub use config::{ExperimentConfig, GridConfig, KernelConfig, Tolerances};
pub use report::*;
pub use run::{run, run_all, run_classify, run_curvature, run_equivalence, run_kernel, run_lattice, Run, RunOptions};

use crate::error::Result;

pub const REPORT_FILE: &str = "report.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Lattice,
    Classify,
    Equivalence,
    Kernel,
    Curvature,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Lattice => "lattice",
            Command::Classify => "classify",
            Command::Equivalence => "equivalence",
            Command::Kernel => "kernel",
            Command::Curvature => "curvature",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "shiftlab", version, about = "Reducing subspaces, kernels and curvature of weighted shift powers")]
pub struct Cli {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "shiftlab-out")]
    pub out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the shift, its power and the minimal projections as CSV.
    #[arg(long)]
    pub emit_matrices: bool,
}

/// Writes through a temporary file in the same directory and renames it over
/// `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn timings_json(timings: &[(String, f64)]) -> String {
    let map: serde_json::Map<String, serde_json::Value> =
        timings.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
    serde_json::to_string_pretty(&map).expect("timings serialize") + "\n"
}

/// Writes the report and its side files under `out`.
pub fn write_run(run: &Run, out: &Path) -> Result<PathBuf> {
    for (name, contents) in &run.side_files {
        write_atomic(&out.join(name), contents.as_bytes())?;
    }
    write_atomic(&out.join(TIMINGS_FILE), timings_json(&run.timings).as_bytes())?;
    let path = out.join(REPORT_FILE);
    write_atomic(&path, run.report.to_json().as_bytes())?;
    Ok(path)
}

pub fn execute(cli: &Cli) -> Result<Run> {
    let config = ExperimentConfig::load(&cli.config)?;
    let run = run::run(cli.command, &config, cli.seed, RunOptions { emit_matrices: cli.emit_matrices })?;
    write_run(&run, &cli.out)?;
    Ok(run)
}

/// Exit codes: 0 when every check passes, 2 on a failed check, 1 on usage or
/// config errors.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(run) => {
            let report = &run.report;
            for s in &report.skipped {
                eprintln!("skipped {}: {}", s.section, s.reason);
            }
            let failed: Vec<_> = report.failed_checks().collect();
            for c in &failed {
                eprintln!("FAILED {}: {:?} vs {:?} {}", c.name, c.measured.value, c.measured.relation, c.measured.tol);
            }
            println!(
                "{}: {} checks, {} failed; report at {}",
                report.command,
                report.checks.len(),
                failed.len(),
                cli.out.join(REPORT_FILE).display()
            );
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
