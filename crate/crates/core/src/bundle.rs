//! Case-bundle loading and saving.
//!
//! A bundle is a directory of hand-editable tables:
//!
//! ```text
//! config.toml            horizon, tolerances, seeds, stage knobs
//! regions.csv            one row per region
//! units.csv              one row per unit group
//! interfaces.csv         one row per interface (may be empty apart from header)
//! series/<region>_<year>.csv   hour, load_mw, solar_cf
//! ```
//!
//! Per-year scalar columns accept either a single value (applied to every
//! year) or `n_years` values separated by `;`. Expansion to dense arrays
//! happens at load time.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    validate_case, HourlySeries, Interface, PlanningCase, PlanningHorizon, Region, UnitGroup,
    UnitKind, ValidationReport,
};

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{row}: {message}")]
    Parse {
        file: String,
        row: usize,
        message: String,
    },
    #[error("invalid config {file}: {message}")]
    Config { file: String, message: String },
    #[error("case invariants violated:\n{}", format_report(.0))]
    Invalid(ValidationReport),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_report(report: &ValidationReport) -> String {
    report
        .violations
        .iter()
        .map(|v| format!("  {}: {}", v.path, v.message))
        .collect::<Vec<_>>()
        .join("\n")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BundleError + '_ {
    move |source| BundleError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Run configuration (config.toml)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub k_per_year: usize,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { k_per_year: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub max_nodes: usize,
    pub abs_gap: f64,
    pub rel_gap: f64,
    /// 0 disables the time limit.
    pub time_limit_seconds: f64,
    pub audit_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            max_nodes: 100_000,
            abs_gap: 1e-6,
            rel_gap: 0.0,
            time_limit_seconds: 0.0,
            audit_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionConfig {
    /// When true the emission coefficient is read as ton/MWh and the heat
    /// rate is not folded into the emission term.
    pub emission_per_mwh: bool,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self { emission_per_mwh: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub dt: f64,
    pub flat_horizon: f64,
    pub contingency_horizon: f64,
    pub ripple_tol_hz: f64,
    pub settle_band_hz: f64,
    pub rocof_window_s: f64,
    /// Governor servo time constant applied to every aggregate machine (s).
    pub governor_tg: f64,
    /// Load damping per region, on the online machine base (pu).
    pub damping: f64,
    /// Optional PV frequency droop (pu on PV MW base); 0 disables.
    pub pv_droop: f64,
    /// Average frequency weighting: inertia-weighted when true, arithmetic
    /// otherwise.
    pub inertia_weighted_average: bool,
    /// Governor deadband (Hz); 0 disables.
    pub governor_deadband_hz: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            dt: 0.005,
            flat_horizon: 20.0,
            contingency_horizon: 60.0,
            ripple_tol_hz: 0.001,
            settle_band_hz: 0.005,
            rocof_window_s: 0.5,
            governor_tg: 8.0,
            damping: 0.0,
            pv_droop: 0.0,
            inertia_weighted_average: true,
            governor_deadband_hz: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Instantaneous PV penetration targets, strictly increasing, each in [0, 1).
    pub levels: Vec<f64>,
    /// Region where the generation trip is applied.
    pub disturbance_region: String,
    /// Trip size as a fraction of total system generation; used when
    /// `disturbance_mw` is 0.
    pub disturbance_fraction: f64,
    /// Absolute trip size in MW; overrides the fraction when > 0.
    pub disturbance_mw: f64,
    /// Seconds into the contingency run at which the trip occurs.
    pub event_time: f64,
    /// Named block index for scenario construction; -1 selects the
    /// peak-solar block of the final year.
    pub block: i64,
    /// Worker bound for concurrent per-level scenario runs.
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            levels: vec![0.05, 0.25, 0.45, 0.65],
            disturbance_region: String::new(),
            disturbance_fraction: 0.003,
            disturbance_mw: 0.0,
            event_time: 1.0,
            block: -1,
            workers: 4,
        }
    }
}

/// Everything in `config.toml`: the horizon plus per-stage knobs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaseConfig {
    pub horizon: PlanningHorizon,
    pub partition: PartitionConfig,
    pub solver: SolverConfig,
    pub expansion: ExpansionConfig,
    pub dynamics: DynamicsConfig,
    pub sweep: SweepConfig,
}

pub fn load_config(dir: &Path) -> Result<CaseConfig, BundleError> {
    let path = dir.join("config.toml");
    if !path.exists() {
        return Err(BundleError::MissingFile(path));
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    toml::from_str(&text).map_err(|e| BundleError::Config {
        file: path.display().to_string(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

struct Row<'a> {
    file: &'a str,
    row: usize,
    headers: &'a csv::StringRecord,
    record: &'a csv::StringRecord,
}

impl<'a> Row<'a> {
    fn err(&self, message: String) -> BundleError {
        BundleError::Parse {
            file: self.file.to_string(),
            row: self.row,
            message,
        }
    }

    fn get(&self, column: &str) -> Result<&'a str, BundleError> {
        let idx = self
            .headers
            .iter()
            .position(|h| h.trim() == column)
            .ok_or_else(|| self.err(format!("missing column \"{column}\"")))?;
        Ok(self.record.get(idx).unwrap_or("").trim())
    }

    fn text(&self, column: &str) -> Result<String, BundleError> {
        Ok(self.get(column)?.to_string())
    }

    fn number(&self, column: &str) -> Result<f64, BundleError> {
        let raw = self.get(column)?;
        raw.parse::<f64>()
            .map_err(|_| self.err(format!("column \"{column}\": unparseable number \"{raw}\"")))
    }

    fn count(&self, column: &str) -> Result<u32, BundleError> {
        let raw = self.get(column)?;
        raw.parse::<u32>()
            .map_err(|_| self.err(format!("column \"{column}\": unparseable count \"{raw}\"")))
    }

    /// A per-year column: one value for all years, or `n_years` values
    /// separated by `;`.
    fn per_year(&self, column: &str, n_years: usize) -> Result<Vec<f64>, BundleError> {
        let raw = self.get(column)?;
        let parts: Vec<&str> = raw.split(';').map(str::trim).collect();
        let mut values = Vec::with_capacity(parts.len());
        for part in &parts {
            values.push(part.parse::<f64>().map_err(|_| {
                self.err(format!("column \"{column}\": unparseable number \"{part}\""))
            })?);
        }
        match values.len() {
            1 => Ok(vec![values[0]; n_years]),
            n if n == n_years => Ok(values),
            n => Err(self.err(format!(
                "column \"{column}\": expected 1 or {n_years} values, found {n}"
            ))),
        }
    }
}

fn read_csv<T>(
    path: &Path,
    mut parse: impl FnMut(&Row) -> Result<T, BundleError>,
) -> Result<Vec<T>, BundleError> {
    if !path.exists() {
        return Err(BundleError::MissingFile(path.to_path_buf()));
    }
    let file_name = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| BundleError::Parse {
            file: file_name.clone(),
            row: 0,
            message: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| BundleError::Parse {
            file: file_name.clone(),
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| BundleError::Parse {
            file: file_name.clone(),
            row: i + 2,
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        out.push(parse(&Row {
            file: &file_name,
            row: i + 2,
            headers: &headers,
            record: &record,
        })?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Loads and cross-links a planning case from a bundle directory. Every
/// invariant of the domain types holds on success; violations are reported
/// with the offending file and field path.
pub fn load_case_bundle(dir: impl AsRef<Path>) -> Result<PlanningCase, BundleError> {
    let dir = dir.as_ref();
    let config = load_config(dir)?;
    let horizon = config.horizon;
    let n_years = horizon.n_years;

    let regions = read_csv(&dir.join("regions.csv"), |row| {
        Ok(Region {
            id: row.text("id")?,
            name: row.text("name")?,
            pv_build_cost_by_year: row.per_year("pv_build_cost", n_years)?,
            land_cost_by_year: row.per_year("land_cost", n_years)?,
            pv_build_limit_by_year: row.per_year("pv_build_limit", n_years)?,
            voll: row.number("voll")?,
            reserve_margin_by_year: row.per_year("reserve_margin", n_years)?,
            rps_by_year: row.per_year("rps", n_years)?,
            maintenance_factor: row.number("maintenance_factor")?,
            validated_dispatch_total: row.number("validated_dispatch_total")?,
        })
    })?;

    let units = read_csv(&dir.join("units.csv"), |row| {
        let kind_raw = row.text("kind")?;
        let kind = UnitKind::parse(&kind_raw)
            .ok_or_else(|| row.err(format!("unknown unit kind \"{kind_raw}\"")))?;
        Ok(UnitGroup {
            id: row.text("id")?,
            region: row.text("region")?,
            kind,
            p_max: row.number("p_max")?,
            existing_count: row.count("existing_count")?,
            fixed_om: row.number("fixed_om")?,
            var_om: row.number("var_om")?,
            heat_rate: row.number("heat_rate")?,
            fuel_price_by_year: row.per_year("fuel_price", n_years)?,
            emission_coeff: row.number("emission_coeff")?,
            emission_price_by_year: row.per_year("emission_price", n_years)?,
            forced_outage_rate: row.number("forced_outage_rate")?,
            maintenance_outage_rate: row.number("maintenance_outage_rate")?,
            inertia_h: row.number("inertia_h")?,
            governor_droop: row.number("governor_droop")?,
            validated_dispatch: row.number("validated_dispatch")?,
        })
    })?;

    let interfaces = read_csv(&dir.join("interfaces.csv"), |row| {
        Ok(Interface {
            id: row.text("id")?,
            from_region: row.text("from_region")?,
            to_region: row.text("to_region")?,
            capacity: row.number("capacity")?,
            wheeling_price: row.number("wheeling_price")?,
            sync_stiffness: row.number("sync_stiffness")?,
        })
    })?;

    let mut series = Vec::new();
    for region in &regions {
        for year in 1..=n_years {
            let path = dir.join("series").join(format!("{}_{}.csv", region.id, year));
            let rows = read_csv(&path, |row| {
                Ok((row.number("hour")?, row.number("load_mw")?, row.number("solar_cf")?))
            })?;
            let mut load_mw = Vec::with_capacity(rows.len());
            let mut solar_cf = Vec::with_capacity(rows.len());
            for (_, load, cf) in rows {
                load_mw.push(load);
                solar_cf.push(cf);
            }
            series.push(HourlySeries {
                region: region.id.clone(),
                year,
                load_mw,
                solar_cf,
            });
        }
    }

    let case = PlanningCase {
        horizon,
        regions,
        units,
        interfaces,
        series,
    };
    let report = validate_case(&case);
    if !report.is_empty() {
        return Err(BundleError::Invalid(report));
    }
    Ok(case)
}

// ---------------------------------------------------------------------------
// Saving
// ---------------------------------------------------------------------------

fn join_per_year(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes `case` back out as a bundle. Loading the result reproduces the
/// case field-by-field; the emitted `config.toml` carries `config` with the
/// horizon replaced by the case's own.
pub fn save_case_bundle(
    case: &PlanningCase,
    config: &CaseConfig,
    dir: impl AsRef<Path>,
) -> Result<(), BundleError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir.join("series")).map_err(io_err(dir))?;

    let mut config = config.clone();
    config.horizon = case.horizon.clone();
    let config_path = dir.join("config.toml");
    let text = toml::to_string_pretty(&config).expect("config serializes");
    fs::write(&config_path, text).map_err(io_err(&config_path))?;

    let mut w = csv::Writer::from_path(dir.join("regions.csv")).map_err(|e| BundleError::Parse {
        file: "regions.csv".into(),
        row: 0,
        message: e.to_string(),
    })?;
    w.write_record([
        "id",
        "name",
        "pv_build_cost",
        "land_cost",
        "pv_build_limit",
        "voll",
        "reserve_margin",
        "rps",
        "maintenance_factor",
        "validated_dispatch_total",
    ])
    .ok();
    for r in &case.regions {
        w.write_record([
            r.id.clone(),
            r.name.clone(),
            join_per_year(&r.pv_build_cost_by_year),
            join_per_year(&r.land_cost_by_year),
            join_per_year(&r.pv_build_limit_by_year),
            r.voll.to_string(),
            join_per_year(&r.reserve_margin_by_year),
            join_per_year(&r.rps_by_year),
            r.maintenance_factor.to_string(),
            r.validated_dispatch_total.to_string(),
        ])
        .ok();
    }
    w.flush().ok();

    let mut w = csv::Writer::from_path(dir.join("units.csv")).map_err(|e| BundleError::Parse {
        file: "units.csv".into(),
        row: 0,
        message: e.to_string(),
    })?;
    w.write_record([
        "id",
        "region",
        "kind",
        "p_max",
        "existing_count",
        "fixed_om",
        "var_om",
        "heat_rate",
        "fuel_price",
        "emission_coeff",
        "emission_price",
        "forced_outage_rate",
        "maintenance_outage_rate",
        "inertia_h",
        "governor_droop",
        "validated_dispatch",
    ])
    .ok();
    for u in &case.units {
        w.write_record([
            u.id.clone(),
            u.region.clone(),
            u.kind.as_str().to_string(),
            u.p_max.to_string(),
            u.existing_count.to_string(),
            u.fixed_om.to_string(),
            u.var_om.to_string(),
            u.heat_rate.to_string(),
            join_per_year(&u.fuel_price_by_year),
            u.emission_coeff.to_string(),
            join_per_year(&u.emission_price_by_year),
            u.forced_outage_rate.to_string(),
            u.maintenance_outage_rate.to_string(),
            u.inertia_h.to_string(),
            u.governor_droop.to_string(),
            u.validated_dispatch.to_string(),
        ])
        .ok();
    }
    w.flush().ok();

    let mut w =
        csv::Writer::from_path(dir.join("interfaces.csv")).map_err(|e| BundleError::Parse {
            file: "interfaces.csv".into(),
            row: 0,
            message: e.to_string(),
        })?;
    w.write_record([
        "id",
        "from_region",
        "to_region",
        "capacity",
        "wheeling_price",
        "sync_stiffness",
    ])
    .ok();
    for i in &case.interfaces {
        w.write_record([
            i.id.clone(),
            i.from_region.clone(),
            i.to_region.clone(),
            i.capacity.to_string(),
            i.wheeling_price.to_string(),
            i.sync_stiffness.to_string(),
        ])
        .ok();
    }
    w.flush().ok();

    for s in &case.series {
        let path = dir.join("series").join(format!("{}_{}.csv", s.region, s.year));
        let mut w = csv::Writer::from_path(&path).map_err(|e| BundleError::Parse {
            file: path.display().to_string(),
            row: 0,
            message: e.to_string(),
        })?;
        w.write_record(["hour", "load_mw", "solar_cf"]).ok();
        for (h, (load, cf)) in s.load_mw.iter().zip(&s.solar_cf).enumerate() {
            w.write_record([h.to_string(), load.to_string(), cf.to_string()]).ok();
        }
        w.flush().ok();
    }
    Ok(())
}
