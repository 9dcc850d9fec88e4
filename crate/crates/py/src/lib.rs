//! Python bindings: the pipeline stages plus the main result types.
//!
//! Build with `cargo build -p pvgrid-py --release`, rename the produced
//! `libpvgrid.so` to `pvgrid.so` (or `.pyd` on Windows), put it on
//! `sys.path`, and `import pvgrid`. See `python/smoke_test.py`.

use std::path::Path;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pvgrid_core::bundle::{load_case_bundle, load_config, BundleError};
use pvgrid_core::data::validate_case;
use pvgrid_core::pipeline::{self, PipelineError};

fn pipeline_err(e: PipelineError) -> PyErr {
    match &e {
        PipelineError::Bundle(BundleError::Invalid(_)) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// One invariant violation of a bundle, as (field path, message).
#[pyfunction]
fn validate_bundle(bundle: &str) -> PyResult<Vec<(String, String)>> {
    match load_case_bundle(bundle) {
        Ok(case) => Ok(validate_case(&case)
            .violations
            .into_iter()
            .map(|v| (v.path, v.message))
            .collect()),
        Err(BundleError::Invalid(report)) => Ok(report
            .violations
            .into_iter()
            .map(|v| (v.path, v.message))
            .collect()),
        Err(e) => Err(PyRuntimeError::new_err(e.to_string())),
    }
}

/// SHA-256 identifying the exact bundle contents.
#[pyfunction]
fn bundle_hash(bundle: &str) -> PyResult<String> {
    pipeline::bundle_sha256(bundle).map_err(pipeline_err)
}

/// One representative time block.
#[pyclass(get_all, frozen, skip_from_py_object)]
#[derive(Clone)]
struct Block {
    year: usize,
    block: usize,
    duration_fraction: f64,
    load_by_region: Vec<f64>,
    pv_cf_by_region: Vec<f64>,
}

#[pymethods]
impl Block {
    fn __repr__(&self) -> String {
        format!(
            "Block(year={}, block={}, duration_fraction={})",
            self.year, self.block, self.duration_fraction
        )
    }
}

/// Runs the partition stage; returns the representative blocks.
#[pyfunction]
#[pyo3(signature = (bundle, out, seed=None))]
fn partition(bundle: &str, out: &str, seed: Option<u64>) -> PyResult<Vec<Block>> {
    let (sched, _) = pipeline::run_partition(Path::new(bundle), Path::new(out), seed)
        .map_err(pipeline_err)?;
    Ok(sched
        .blocks
        .into_iter()
        .map(|b| Block {
            year: b.year,
            block: b.block,
            duration_fraction: b.duration_fraction,
            load_by_region: b.load_by_region,
            pv_cf_by_region: b.pv_cf_by_region,
        })
        .collect())
}

/// The expansion optimum: build decisions and the cost breakdown.
#[pyclass(get_all, frozen)]
struct PlanResult {
    status: String,
    objective: f64,
    nodes_explored: usize,
    /// pv_built[region][year - 1], integer units.
    pv_built: Vec<Vec<u32>>,
    region_ids: Vec<String>,
    pv_expansion_cost: f64,
    fixed_om_cost: f64,
    var_om_cost: f64,
    fuel_cost: f64,
    emission_cost: f64,
    wheeling_cost: f64,
    lost_load_cost: f64,
    audit_pass: bool,
    audit_max_residual: f64,
}

#[pymethods]
impl PlanResult {
    fn __repr__(&self) -> String {
        format!(
            "PlanResult(status='{}', objective={}, audit_pass={})",
            self.status, self.objective, self.audit_pass
        )
    }
}

/// Runs the plan stage (requires a prior partition into the same `out`).
#[pyfunction]
fn plan(bundle: &str, out: &str) -> PyResult<PlanResult> {
    let case = load_case_bundle(bundle).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let file = pipeline::run_plan(Path::new(bundle), Path::new(out)).map_err(pipeline_err)?;
    let cb = &file.solution.cost_breakdown;
    Ok(PlanResult {
        status: file.status,
        objective: file.objective,
        nodes_explored: file.nodes_explored,
        pv_built: file.solution.pv_built.clone(),
        region_ids: case.regions.iter().map(|r| r.id.clone()).collect(),
        pv_expansion_cost: cb.pv_expansion,
        fixed_om_cost: cb.fixed_om,
        var_om_cost: cb.var_om,
        fuel_cost: cb.fuel,
        emission_cost: cb.emission,
        wheeling_cost: cb.wheeling,
        lost_load_cost: cb.lost_load,
        audit_pass: file.audit.pass,
        audit_max_residual: file.audit.max_residual(),
    })
}

/// Frequency-response outcome of one penetration level.
#[pyclass(get_all, frozen)]
struct LevelMetrics {
    level: f64,
    status: String,
    nadir_hz: Option<f64>,
    rocof_mhz_per_s: Option<f64>,
    settling_time_s: Option<f64>,
    settling_frequency_hz: Option<f64>,
}

#[pymethods]
impl LevelMetrics {
    fn __repr__(&self) -> String {
        format!(
            "LevelMetrics(level={}, status='{}', nadir_hz={:?})",
            self.level, self.status, self.nadir_hz
        )
    }
}

/// Runs the penetration sweep (requires prior partition and plan stages).
#[pyfunction]
fn sweep(bundle: &str, out: &str) -> PyResult<Vec<LevelMetrics>> {
    let summary =
        pipeline::run_sweep(Path::new(bundle), Path::new(out)).map_err(pipeline_err)?;
    Ok(summary
        .levels
        .into_iter()
        .map(|l| LevelMetrics {
            level: l.level,
            status: l.status,
            nadir_hz: l.metrics.map(|m| m.nadir_hz),
            rocof_mhz_per_s: l.metrics.map(|m| m.rocof_mhz_per_s),
            settling_time_s: l.metrics.map(|m| m.settling_time_s),
            settling_frequency_hz: l.metrics.map(|m| m.settling_frequency_hz),
        })
        .collect())
}

/// Renders `report.md` from whatever artifacts exist; returns its path.
#[pyfunction]
fn report(bundle: &str, out: &str) -> PyResult<String> {
    pipeline::run_report(Path::new(bundle), Path::new(out))
        .map(|p| p.display().to_string())
        .map_err(pipeline_err)
}

/// Runs partition, plan, sweep, and report in order.
#[pyfunction]
#[pyo3(signature = (bundle, out, seed=None))]
fn run_all(bundle: &str, out: &str, seed: Option<u64>) -> PyResult<()> {
    pipeline::run_all(Path::new(bundle), Path::new(out), seed).map_err(pipeline_err)
}

/// Configured penetration levels of a bundle.
#[pyfunction]
fn sweep_levels(bundle: &str) -> PyResult<Vec<f64>> {
    load_config(Path::new(bundle))
        .map(|c| c.sweep.levels)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn pvgrid(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Block>()?;
    m.add_class::<PlanResult>()?;
    m.add_class::<LevelMetrics>()?;
    m.add_function(wrap_pyfunction!(validate_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(bundle_hash, m)?)?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(run_all, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_levels, m)?)?;
    Ok(())
}
