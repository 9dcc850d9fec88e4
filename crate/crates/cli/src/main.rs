//! `pvgrid`: run the planning/dynamics pipeline against a case bundle.
//!
//! Exit codes: 0 success, 1 internal error, 2 invalid input bundle,
//! 3 solver finished without a proven optimum.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pvgrid_core::bundle::BundleError;
use pvgrid_core::pipeline::{
    run_all, run_partition, run_plan, run_report, run_sweep, PipelineError,
};

#[derive(Parser)]
#[command(name = "pvgrid", version, about = "PV expansion planning and frequency-response pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Case bundle directory (config.toml, regions.csv, units.csv,
    /// interfaces.csv, series/).
    #[arg(long)]
    bundle: PathBuf,
    /// Output directory for run artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Alternate config.toml; overrides the bundle's for this run.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce hourly series to representative time blocks.
    Partition {
        #[command(flatten)]
        common: Common,
        /// Override the partition seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve the PV expansion program and audit the optimum.
    Plan {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the configured penetration levels and extract metrics.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Render a human-readable report of whatever artifacts exist.
    Report {
        #[command(flatten)]
        common: Common,
    },
    /// Run partition, plan, sweep, and report in order.
    RunAll {
        #[command(flatten)]
        common: Common,
        /// Override the partition seed from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// A bundle with its config possibly swapped out by `--config`. The copy
/// lives until the run completes.
struct EffectiveBundle {
    dir: PathBuf,
    _tmp: Option<tempfile::TempDir>,
}

fn copy_dir(from: &Path, to: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(to)?;
    for entry in std::fs::read_dir(from)? {
        let entry = entry?;
        let target = to.join(entry.file_name());
        if entry.file_type()?.is_dir() {
            copy_dir(&entry.path(), &target)?;
        } else {
            std::fs::copy(entry.path(), &target)?;
        }
    }
    Ok(())
}

fn effective_bundle(common: &Common) -> std::io::Result<EffectiveBundle> {
    match &common.config {
        None => Ok(EffectiveBundle {
            dir: common.bundle.clone(),
            _tmp: None,
        }),
        Some(config) => {
            let tmp = tempfile::tempdir()?;
            copy_dir(&common.bundle, tmp.path())?;
            std::fs::copy(config, tmp.path().join("config.toml"))?;
            Ok(EffectiveBundle {
                dir: tmp.path().to_path_buf(),
                _tmp: Some(tmp),
            })
        }
    }
}

fn exit_code_for(err: &PipelineError) -> u8 {
    match err {
        PipelineError::Bundle(BundleError::Invalid(_))
        | PipelineError::Bundle(BundleError::Parse { .. })
        | PipelineError::Bundle(BundleError::Config { .. })
        | PipelineError::Bundle(BundleError::MissingFile(_)) => 2,
        PipelineError::NonOptimal { .. } => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Partition { common, seed } => {
            let bundle = effective_bundle(&common).map_err(|e| PipelineError::Io {
                path: common.bundle.clone(),
                source: e,
            })?;
            let (sched, report) = run_partition(&bundle.dir, &common.out, seed)?;
            println!(
                "partition: {} block(s) over {} year(s), max energy error {:e}",
                sched.blocks.len(),
                sched.n_years(),
                report
                    .years
                    .iter()
                    .map(|y| y.energy_rel_error)
                    .fold(0.0, f64::max)
            );
        }
        Command::Plan { common } => {
            let bundle = effective_bundle(&common).map_err(|e| PipelineError::Io {
                path: common.bundle.clone(),
                source: e,
            })?;
            let file = run_plan(&bundle.dir, &common.out)?;
            println!(
                "plan: {} in {} node(s), objective {}, audit {}",
                file.status,
                file.nodes_explored,
                file.objective,
                if file.audit.pass { "pass" } else { "FAIL" }
            );
        }
        Command::Sweep { common } => {
            let bundle = effective_bundle(&common).map_err(|e| PipelineError::Io {
                path: common.bundle.clone(),
                source: e,
            })?;
            let sweep = run_sweep(&bundle.dir, &common.out)?;
            for level in &sweep.levels {
                match &level.metrics {
                    Some(m) => println!(
                        "sweep: level {} {} nadir {} Hz, rocof {} mHz/s",
                        level.level, level.status, m.nadir_hz, m.rocof_mhz_per_s
                    ),
                    None => println!("sweep: level {} {}", level.level, level.status),
                }
            }
        }
        Command::Report { common } => {
            let bundle = effective_bundle(&common).map_err(|e| PipelineError::Io {
                path: common.bundle.clone(),
                source: e,
            })?;
            let path = run_report(&bundle.dir, &common.out)?;
            println!("report: {}", path.display());
        }
        Command::RunAll { common, seed } => {
            let bundle = effective_bundle(&common).map_err(|e| PipelineError::Io {
                path: common.bundle.clone(),
                source: e,
            })?;
            run_all(&bundle.dir, &common.out, seed)?;
            println!("run-all: artifacts in {}", common.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
