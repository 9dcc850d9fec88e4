//! End-to-end pipeline stages and their on-disk artifacts.
//!
//! Stages run in order against one bundle directory and one output
//! directory:
//!
//! 1. `partition` — `blocks.csv`, `assignment.csv`, `partition_report.json`
//! 2. `plan`      — `model.mps`, `solution.json` (with audit)
//! 3. `sweep`     — `scenario_<level>.json`, `trace_<level>.csv`,
//!                  `metrics_<level>.json`, `summary.csv`
//! 4. `report`    — `report.md`
//!
//! Every artifact is byte-identical across runs for the same inputs:
//! nothing depends on time, machine, or thread scheduling. A `manifest.json`
//! records the bundle's SHA-256 so later stages refuse inputs produced from
//! a different bundle.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blocks::{
    partition_blocks, partition_report, read_block_schedule, write_block_schedule,
    BlockSchedule, PartitionError, PartitionReport, TimeBlock,
};
use crate::bundle::{load_case_bundle, load_config, BundleError, CaseConfig};
use crate::data::PlanningCase;
use crate::dynamics::{
    compute_metrics, flat_run, simulate_contingency, Disturbance, DynamicsError, FlatRunReport,
    FrequencyMetrics,
};
use crate::expansion::{
    audit_solution, build_expansion_lp, extract_solution, AuditReport, ExpansionError,
    ExpansionSolution,
};
use crate::scenario::{build_dynamic_case, DynamicCase, ScenarioError};
use crate::solver::{solve_milp, MilpStatus, SolverOptions};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Solve(#[from] crate::solver::SolveError),
    #[error("solver finished {status} without a proven optimum")]
    NonOptimal { status: String },
    #[error("solution audit failed: worst residual {residual:e} > {tol:e} ({family} at {at})")]
    AuditFailed {
        family: String,
        at: String,
        residual: f64,
        tol: f64,
    },
    #[error("missing artifact {0}; run the earlier stages first")]
    MissingArtifact(PathBuf),
    #[error(
        "stale artifact: {artifact} was produced from bundle {found}, current bundle is {expected}"
    )]
    Integrity {
        artifact: String,
        expected: String,
        found: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::MissingArtifact(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Artifact {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let text = serde_json::to_string_pretty(value).expect("serializable artifact");
    fs::write(path, text + "\n").map_err(io_err(path))
}

/// SHA-256 over every file of a bundle, in a fixed order, with file names
/// mixed in. Identifies the exact inputs a run was produced from.
pub fn bundle_sha256(dir: impl AsRef<Path>) -> Result<String, PipelineError> {
    let dir = dir.as_ref();
    let mut files = vec![
        PathBuf::from("config.toml"),
        PathBuf::from("regions.csv"),
        PathBuf::from("units.csv"),
        PathBuf::from("interfaces.csv"),
    ];
    let series_dir = dir.join("series");
    if series_dir.is_dir() {
        let mut names: Vec<PathBuf> = fs::read_dir(&series_dir)
            .map_err(io_err(&series_dir))?
            .filter_map(|e| e.ok())
            .map(|e| PathBuf::from("series").join(e.file_name()))
            .collect();
        names.sort();
        files.extend(names);
    }
    let mut hasher = Sha256::new();
    for rel in files {
        let path = dir.join(&rel);
        if !path.exists() {
            continue;
        }
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0u8]);
        hasher.update(fs::read(&path).map_err(io_err(&path))?);
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

/// What produced the artifacts in an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub bundle_sha256: String,
    pub seed: u64,
    pub config: CaseConfig,
    /// Stage-qualified artifact names mapped to paths relative to the
    /// output directory.
    pub artifacts: BTreeMap<String, String>,
}

fn update_manifest(
    out: &Path,
    bundle_hash: &str,
    seed: u64,
    config: &CaseConfig,
    artifacts: &[(&str, &str)],
) -> Result<(), PipelineError> {
    let path = out.join("manifest.json");
    let mut manifest = if path.exists() {
        read_json::<RunManifest>(&path)?
    } else {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            bundle_sha256: bundle_hash.to_string(),
            seed,
            config: config.clone(),
            artifacts: BTreeMap::new(),
        }
    };
    manifest.bundle_sha256 = bundle_hash.to_string();
    manifest.seed = seed;
    manifest.config = config.clone();
    for (k, v) in artifacts {
        manifest.artifacts.insert(k.to_string(), v.to_string());
    }
    write_json(&path, &manifest)
}

// ---------------------------------------------------------------------------
// Stage 1: partition
// ---------------------------------------------------------------------------

pub fn run_partition(
    bundle: &Path,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<(BlockSchedule, PartitionReport), PipelineError> {
    let config = load_config(bundle)?;
    let case = load_case_bundle(bundle)?;
    let seed = seed_override.unwrap_or(config.partition.seed);
    let sched = partition_blocks(&case, config.partition.k_per_year, seed)?;
    let report = partition_report(&sched, &case)?;

    fs::create_dir_all(out).map_err(io_err(out))?;
    write_block_schedule(&sched, out)?;
    write_json(&out.join("partition_report.json"), &report)?;
    update_manifest(
        out,
        &bundle_sha256(bundle)?,
        seed,
        &config,
        &[
            ("partition.blocks", "blocks.csv"),
            ("partition.assignment", "assignment.csv"),
            ("partition.report", "partition_report.json"),
        ],
    )?;
    Ok((sched, report))
}

// ---------------------------------------------------------------------------
// Stage 2: plan
// ---------------------------------------------------------------------------

/// `solution.json`: the expansion optimum plus enough context to check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub bundle_sha256: String,
    pub status: String,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes_explored: usize,
    pub solution: ExpansionSolution,
    pub audit: AuditReport,
}

pub fn run_plan(bundle: &Path, out: &Path) -> Result<SolutionFile, PipelineError> {
    let config = load_config(bundle)?;
    let case = load_case_bundle(bundle)?;
    let blocks_path = out.join("blocks.csv");
    if !blocks_path.exists() {
        return Err(PipelineError::MissingArtifact(blocks_path));
    }
    let sched = read_block_schedule(out)?;

    let spec = build_expansion_lp(&case, &sched, &config.expansion)?;
    let mps_path = out.join("model.mps");
    let mut mps = Vec::new();
    spec.write_mps(&mut mps).expect("in-memory write");
    fs::write(&mps_path, mps).map_err(io_err(&mps_path))?;

    let opts = SolverOptions {
        max_iterations: config.solver.max_iterations,
        max_nodes: config.solver.max_nodes,
        abs_gap: config.solver.abs_gap,
        rel_gap: config.solver.rel_gap,
        time_limit_seconds: config.solver.time_limit_seconds,
        ..SolverOptions::default()
    };
    let milp = solve_milp(&spec, &opts)?;
    let status = format!("{:?}", milp.status).to_lowercase();
    let incumbent = match (&milp.status, milp.incumbent) {
        (MilpStatus::Optimal, Some(inc)) => inc,
        _ => return Err(PipelineError::NonOptimal { status }),
    };

    let solution = extract_solution(&case, &sched, &spec, &incumbent.values, &config.expansion)?;
    let audit = audit_solution(&case, &sched, &solution, config.solver.audit_tol)?;
    if !audit.pass {
        let worst = audit
            .families
            .iter()
            .max_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
            .expect("non-empty audit");
        return Err(PipelineError::AuditFailed {
            family: worst.family.clone(),
            at: worst.at.clone(),
            residual: worst.max_residual,
            tol: config.solver.audit_tol,
        });
    }

    let file = SolutionFile {
        bundle_sha256: bundle_sha256(bundle)?,
        status,
        objective: incumbent.objective,
        bound: milp.bound,
        gap: milp.gap,
        nodes_explored: milp.nodes_explored,
        solution,
        audit,
    };
    write_json(&out.join("solution.json"), &file)?;
    update_manifest(
        out,
        &file.bundle_sha256,
        config.partition.seed,
        &config,
        &[
            ("plan.model", "model.mps"),
            ("plan.solution", "solution.json"),
        ],
    )?;
    Ok(file)
}

// ---------------------------------------------------------------------------
// Stage 3: sweep
// ---------------------------------------------------------------------------

/// File-name tag of a penetration level: percent, `.` replaced by `p`.
pub fn level_tag(level: f64) -> String {
    let pct = level * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        format!("{pct}").replace('.', "p")
    }
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: f64,
    /// `ok`, or the reason the level could not be simulated.
    pub status: String,
    pub metrics: Option<FrequencyMetrics>,
    pub flat: Option<FlatRunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub bundle_sha256: String,
    /// Block used for scenario construction: (year, block index).
    pub block: (usize, usize),
    pub disturbance_region: String,
    pub disturbance_mw: f64,
    pub levels: Vec<LevelResult>,
}

/// The block whose total available PV output is highest in the final year;
/// ties go to the lowest block index.
fn peak_solar_block<'a>(
    sched: &'a BlockSchedule,
    pv_capacity: &[f64],
) -> Option<&'a TimeBlock> {
    let year = sched.n_years();
    let score = |b: &TimeBlock| -> f64 {
        b.pv_cf_by_region
            .iter()
            .zip(pv_capacity)
            .map(|(cf, cap)| cf * cap)
            .sum()
    };
    sched
        .blocks_for_year(year)
        .fold(None, |best: Option<&TimeBlock>, b| match best {
            Some(prev) if score(prev) >= score(b) => Some(prev),
            _ => Some(b),
        })
}

struct SweepInputs {
    case: PlanningCase,
    config: CaseConfig,
    pv_capacity: Vec<f64>,
    block: (usize, usize),
    cf: Vec<f64>,
    bundle_hash: String,
}

fn sweep_inputs(bundle: &Path, out: &Path) -> Result<SweepInputs, PipelineError> {
    let config = load_config(bundle)?;
    let case = load_case_bundle(bundle)?;
    let bundle_hash = bundle_sha256(bundle)?;
    let sched = read_block_schedule(out)?;
    let solution: SolutionFile = read_json(&out.join("solution.json"))?;
    if solution.bundle_sha256 != bundle_hash {
        return Err(PipelineError::Integrity {
            artifact: "solution.json".into(),
            expected: bundle_hash,
            found: solution.bundle_sha256,
        });
    }

    let final_year = case.horizon.n_years;
    let pv_capacity: Vec<f64> = (0..case.regions.len())
        .map(|r| solution.solution.pv_capacity(&case, r, final_year))
        .collect();

    let block = if config.sweep.block >= 0 {
        sched
            .block(final_year, config.sweep.block as usize)
            .ok_or_else(|| PipelineError::Artifact {
                path: out.join("blocks.csv"),
                message: format!(
                    "configured block {} not present in year {final_year}",
                    config.sweep.block
                ),
            })?
    } else {
        peak_solar_block(&sched, &pv_capacity).ok_or_else(|| PipelineError::Artifact {
            path: out.join("blocks.csv"),
            message: "schedule has no blocks".into(),
        })?
    };
    let cf = block.pv_cf_by_region.clone();
    let block = (block.year, block.block);
    Ok(SweepInputs {
        case,
        config,
        pv_capacity,
        block,
        cf,
        bundle_hash,
    })
}

pub fn run_sweep(bundle: &Path, out: &Path) -> Result<SweepSummary, PipelineError> {
    let inputs = sweep_inputs(bundle, out)?;
    let SweepInputs {
        case,
        config,
        pv_capacity,
        block,
        cf,
        bundle_hash,
    } = inputs;

    let system_load: f64 = case.units.iter().map(|u| u.validated_dispatch).sum();
    let disturbance_mw = if config.sweep.disturbance_mw > 0.0 {
        config.sweep.disturbance_mw
    } else {
        config.sweep.disturbance_fraction * system_load
    };
    let disturbance_region = if config.sweep.disturbance_region.is_empty() {
        // Default: the region carrying the most validated dispatch.
        case.regions
            .iter()
            .max_by(|a, b| {
                a.validated_dispatch_total
                    .total_cmp(&b.validated_dispatch_total)
            })
            .map(|r| r.id.clone())
            .unwrap_or_default()
    } else {
        config.sweep.disturbance_region.clone()
    };

    let mut levels = config.sweep.levels.clone();
    levels.sort_by(f64::total_cmp);

    // Simulate levels concurrently; each worker pulls the next level index.
    // All outputs are written after joining, in level order.
    type LevelOutput = (LevelResult, Option<(DynamicCase, crate::dynamics::FrequencyTrace)>);
    let results: Mutex<Vec<Option<LevelOutput>>> =
        Mutex::new((0..levels.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = config.sweep.workers.max(1).min(levels.len().max(1));
    let run_level = |i: usize| -> LevelOutput {
        let level = levels[i];
        let dc = match build_dynamic_case(&case, level, &pv_capacity, &cf) {
            Ok(dc) => dc,
            Err(e) => {
                return (
                    LevelResult {
                        level,
                        status: format!("unbuildable: {e}"),
                        metrics: None,
                        flat: None,
                    },
                    None,
                )
            }
        };
        let (flat, _) = match flat_run(&dc, &config.dynamics) {
            Ok(v) => v,
            Err(e) => {
                return (
                    LevelResult {
                        level,
                        status: format!("simulation failed: {e}"),
                        metrics: None,
                        flat: None,
                    },
                    Some((dc, crate::dynamics::FrequencyTrace {
                        region_ids: vec![],
                        t: vec![],
                        f_avg: vec![],
                        f_by_region: vec![],
                        event_time: 0.0,
                    })),
                )
            }
        };
        let region = dc.machine_index(&disturbance_region).unwrap_or(0);
        let event = Disturbance {
            region,
            mw: disturbance_mw,
            time: config.sweep.event_time,
        };
        match simulate_contingency(&dc, &config.dynamics, event) {
            Ok(trace) => {
                let metrics = compute_metrics(&trace, &config.dynamics);
                (
                    LevelResult {
                        level,
                        status: if flat.pass { "ok".into() } else { "flat_run_failed".into() },
                        metrics: Some(metrics),
                        flat: Some(flat),
                    },
                    Some((dc, trace)),
                )
            }
            Err(e) => (
                LevelResult {
                    level,
                    status: format!("simulation failed: {e}"),
                    metrics: None,
                    flat: Some(flat),
                },
                None,
            ),
        }
    };
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= levels.len() {
                    break;
                }
                let output = run_level(i);
                results.lock().unwrap()[i] = Some(output);
            });
        }
    });
    let results: Vec<LevelOutput> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every level simulated"))
        .collect();

    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut level_results = Vec::with_capacity(results.len());
    let mut summary = String::from(
        "level,status,nadir_hz,rocof_mhz_per_s,settling_time_s,settling_frequency_hz\n",
    );
    let mut artifacts: Vec<(String, String)> = Vec::new();
    for (result, extra) in results {
        let tag = level_tag(result.level);
        if let Some((dc, trace)) = extra {
            let scenario_name = format!("scenario_{tag}.json");
            write_json(&out.join(&scenario_name), &dc)?;
            artifacts.push((format!("sweep.scenario_{tag}"), scenario_name));
            if !trace.t.is_empty() {
                let trace_name = format!("trace_{tag}.csv");
                trace.write_csv(&out.join(&trace_name))?;
                artifacts.push((format!("sweep.trace_{tag}"), trace_name));
            }
        }
        if let Some(m) = &result.metrics {
            let metrics_name = format!("metrics_{tag}.json");
            write_json(&out.join(&metrics_name), m)?;
            artifacts.push((format!("sweep.metrics_{tag}"), metrics_name));
            summary.push_str(&format!(
                "{},{},{},{},{},{}\n",
                result.level,
                result.status,
                m.nadir_hz,
                m.rocof_mhz_per_s,
                m.settling_time_s,
                m.settling_frequency_hz
            ));
        } else {
            summary.push_str(&format!("{},{},,,,\n", result.level, result.status));
        }
        level_results.push(result);
    }
    let summary_path = out.join("summary.csv");
    fs::write(&summary_path, summary).map_err(io_err(&summary_path))?;

    let sweep = SweepSummary {
        bundle_sha256: bundle_hash.clone(),
        block,
        disturbance_region,
        disturbance_mw,
        levels: level_results,
    };
    write_json(&out.join("sweep.json"), &sweep)?;
    let mut refs: Vec<(&str, &str)> = vec![
        ("sweep.summary", "summary.csv"),
        ("sweep.results", "sweep.json"),
    ];
    for (k, v) in &artifacts {
        refs.push((k, v));
    }
    update_manifest(out, &bundle_hash, config.partition.seed, &config, &refs)?;
    Ok(sweep)
}

// ---------------------------------------------------------------------------
// Stage 4: report
// ---------------------------------------------------------------------------

pub fn run_report(bundle: &Path, out: &Path) -> Result<PathBuf, PipelineError> {
    let config = load_config(bundle)?;
    let case = load_case_bundle(bundle)?;
    let bundle_hash = bundle_sha256(bundle)?;
    let mut text = String::new();

    text.push_str("# Case report\n\n");
    text.push_str("## Case\n\n");
    text.push_str(&format!("- bundle sha256: `{bundle_hash}`\n"));
    text.push_str(&format!(
        "- horizon: {} year(s), discount rate {}, {} h/year\n",
        case.horizon.n_years, case.horizon.discount_rate, case.horizon.hours_per_year
    ));
    text.push_str(&format!(
        "- {} region(s), {} unit group(s), {} interface(s)\n\n",
        case.regions.len(),
        case.units.len(),
        case.interfaces.len()
    ));

    text.push_str("## Expansion plan\n\n");
    match read_json::<SolutionFile>(&out.join("solution.json")) {
        Err(PipelineError::MissingArtifact(_)) => {
            text.push_str("*Incomplete: no solution artifact; run the plan stage.*\n\n");
        }
        Err(e) => return Err(e),
        Ok(sol) if sol.bundle_sha256 != bundle_hash => {
            text.push_str("*Incomplete: solution was produced from a different bundle.*\n\n");
        }
        Ok(sol) => {
            text.push_str(&format!(
                "- solver: {} after {} node(s), objective {}\n",
                sol.status, sol.nodes_explored, sol.objective
            ));
            text.push_str(&format!(
                "- audit: {} (worst residual {:e})\n\n",
                if sol.audit.pass { "pass" } else { "FAIL" },
                sol.audit.max_residual()
            ));
            text.push_str("| region | year | PV units built |\n|---|---|---|\n");
            for (r, region) in case.regions.iter().enumerate() {
                for y in 1..=case.horizon.n_years {
                    text.push_str(&format!(
                        "| {} | {} | {} |\n",
                        region.id,
                        y,
                        sol.solution.pv_built[r][y - 1]
                    ));
                }
            }
            let cb = &sol.solution.cost_breakdown;
            text.push_str("\n| cost term | $ |\n|---|---|\n");
            for (name, v) in [
                ("PV expansion", cb.pv_expansion),
                ("fixed O&M", cb.fixed_om),
                ("variable O&M", cb.var_om),
                ("fuel", cb.fuel),
                ("emission", cb.emission),
                ("wheeling", cb.wheeling),
                ("lost load", cb.lost_load),
                ("total", cb.total),
            ] {
                text.push_str(&format!("| {name} | {v} |\n"));
            }
            text.push('\n');
        }
    }

    text.push_str("## Penetration sweep\n\n");
    let sweep = match read_json::<SweepSummary>(&out.join("sweep.json")) {
        Err(PipelineError::MissingArtifact(_)) => None,
        Err(e) => return Err(e),
        Ok(s) => Some(s),
    };
    match &sweep {
        None => text.push_str("*Incomplete: no sweep artifact; run the sweep stage.*\n\n"),
        Some(s) if s.bundle_sha256 != bundle_hash => {
            text.push_str("*Incomplete: sweep was produced from a different bundle.*\n\n");
        }
        Some(s) => {
            text.push_str(&format!(
                "Disturbance: loss of {} MW in region `{}`; scenario block year {} block {}.\n\n",
                s.disturbance_mw, s.disturbance_region, s.block.0, s.block.1
            ));
            text.push_str(
                "| level | status | nadir (Hz) | ROCOF (mHz/s) | settling time (s) | settling frequency (Hz) |\n\
                 |---|---|---|---|---|---|\n",
            );
            for l in &s.levels {
                match &l.metrics {
                    Some(m) => text.push_str(&format!(
                        "| {} | {} | {} | {} | {} | {} |\n",
                        l.level,
                        l.status,
                        m.nadir_hz,
                        m.rocof_mhz_per_s,
                        m.settling_time_s,
                        m.settling_frequency_hz
                    )),
                    None => text.push_str(&format!(
                        "| {} | {} | - | - | - | - |\n",
                        l.level, l.status
                    )),
                }
            }
            text.push('\n');
        }
    }

    text.push_str("## Frequency response detail\n\n");
    match &sweep {
        None => text.push_str("*Incomplete: no traces available.*\n"),
        Some(s) => {
            for l in &s.levels {
                let tag = level_tag(l.level);
                let trace = out.join(format!("trace_{tag}.csv"));
                if trace.exists() {
                    text.push_str(&format!(
                        "- level {}: trace in `trace_{tag}.csv`, scenario in `scenario_{tag}.json`",
                        l.level
                    ));
                    if let Some(f) = &l.flat {
                        text.push_str(&format!(
                            "; flat-run deviation {} Hz ({})",
                            f.max_deviation_hz,
                            if f.pass { "pass" } else { "FAIL" }
                        ));
                    }
                    text.push('\n');
                } else {
                    text.push_str(&format!(
                        "- level {}: incomplete ({})\n",
                        l.level, l.status
                    ));
                }
            }
        }
    }

    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join("report.md");
    fs::write(&path, text).map_err(io_err(&path))?;
    update_manifest(
        out,
        &bundle_hash,
        config.partition.seed,
        &config,
        &[("report", "report.md")],
    )?;
    Ok(path)
}

/// Runs all four stages in order.
pub fn run_all(
    bundle: &Path,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<(), PipelineError> {
    run_partition(bundle, out, seed_override)?;
    run_plan(bundle, out)?;
    run_sweep(bundle, out)?;
    run_report(bundle, out)?;
    Ok(())
}
