//! Domain types for multi-region planning cases and their validation.
//!
//! A [`PlanningCase`] bundles the planning horizon, regions, unit groups,
//! inter-regional interfaces, and hourly load/solar series. It is immutable
//! after construction and safe to share across threads.

use serde::{Deserialize, Serialize};

/// Study horizon and economic discounting parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningHorizon {
    /// Number of planning years (N >= 1).
    pub n_years: usize,
    /// Annual discount rate, strictly positive.
    pub discount_rate: f64,
    /// Hours represented by one model year (8760 for a full year; desk-scale
    /// fixtures may use fewer).
    pub hours_per_year: usize,
}

impl Default for PlanningHorizon {
    fn default() -> Self {
        Self {
            n_years: 1,
            discount_rate: 0.05,
            hours_per_year: 8760,
        }
    }
}

/// Generation technology classes. Ordering of the conventional kinds matters
/// for PV displacement (see the scenario module).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Retiring,
    Oil,
    Coal,
    Gas,
    Nuclear,
    Hydro,
    Wind,
    Pv,
}

impl UnitKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "retiring" => Self::Retiring,
            "oil" => Self::Oil,
            "coal" => Self::Coal,
            "gas" => Self::Gas,
            "nuclear" => Self::Nuclear,
            "hydro" => Self::Hydro,
            "wind" => Self::Wind,
            "pv" => Self::Pv,
            _ => return None,
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Retiring => "retiring",
            Self::Oil => "oil",
            Self::Coal => "coal",
            Self::Gas => "gas",
            Self::Nuclear => "nuclear",
            Self::Hydro => "hydro",
            Self::Wind => "wind",
            Self::Pv => "pv",
        }
    }

    /// True for thermal/hydro machines that carry inertia and governors.
    pub fn is_conventional(&self) -> bool {
        !matches!(self, Self::Wind | Self::Pv)
    }

    /// Displacement priority: lower is displaced first. Wind and PV are
    /// never displacement candidates.
    pub fn displacement_priority(&self) -> Option<u8> {
        match self {
            Self::Retiring => Some(0),
            Self::Oil => Some(1),
            Self::Coal => Some(2),
            Self::Gas => Some(3),
            Self::Nuclear => Some(4),
            Self::Hydro => Some(5),
            Self::Wind | Self::Pv => None,
        }
    }
}

/// A balancing region. Generation inside a region connects to one notional
/// node; intra-regional transmission is not modelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub name: String,
    /// PV panel + installation price per built unit, one entry per year ($).
    pub pv_build_cost_by_year: Vec<f64>,
    /// Land price per built unit, one entry per year ($).
    pub land_cost_by_year: Vec<f64>,
    /// Annual PV expansion upper limit, units per year.
    pub pv_build_limit_by_year: Vec<f64>,
    /// Penalty price of lost load ($/MWh).
    pub voll: f64,
    /// Minimum reserve margin per year (MW).
    pub reserve_margin_by_year: Vec<f64>,
    /// Renewable portfolio floor per year (fraction of capacity).
    pub rps_by_year: Vec<f64>,
    /// Maintenance scheduling factor, applied uniformly to every time block
    /// of this region when derating capacity.
    pub maintenance_factor: f64,
    /// Total validated-model generation output of the region (MW); caps the
    /// PV capacity that can be realized by displacement.
    pub validated_dispatch_total: f64,
}

/// A group of identical units of one kind in one region. Dispatch and cost
/// terms treat the group as `existing_count` copies of a `p_max`-MW unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitGroup {
    pub id: String,
    pub region: String,
    pub kind: UnitKind,
    /// Rated MW per unit of the group.
    pub p_max: f64,
    /// Number of existing units.
    pub existing_count: u32,
    /// Fixed O&M ($/MW-year).
    pub fixed_om: f64,
    /// Variable O&M ($/MWh).
    pub var_om: f64,
    /// Heat rate (MBtu/MWh).
    pub heat_rate: f64,
    /// Fuel price per year ($/MBtu).
    pub fuel_price_by_year: Vec<f64>,
    /// Emission coefficient (ton/MBtu).
    pub emission_coeff: f64,
    /// Emission price per year ($/ton).
    pub emission_price_by_year: Vec<f64>,
    pub forced_outage_rate: f64,
    pub maintenance_outage_rate: f64,
    /// Inertia constant on the unit MVA base (s); zero exactly for PV.
    pub inertia_h: f64,
    /// Governor droop (per unit); must be positive for conventional kinds.
    pub governor_droop: f64,
    /// Group output in the validated dynamic model (MW, whole group).
    pub validated_dispatch: f64,
}

impl UnitGroup {
    /// Available fraction of installed capacity after forced outages and
    /// scheduled maintenance, clamped to [0, 1].
    pub fn derate_factor(&self, maintenance_factor: f64) -> f64 {
        let f = 1.0 - self.maintenance_outage_rate * maintenance_factor - self.forced_outage_rate;
        f.clamp(0.0, 1.0)
    }
}

/// A transmission interface between two balancing regions (transport model).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interface {
    pub id: String,
    pub from_region: String,
    pub to_region: String,
    /// Flow limit in either direction (MW).
    pub capacity: f64,
    /// Wheeling charge on transferred energy ($/MWh).
    pub wheeling_price: f64,
    /// Synchronizing tie-line stiffness for dynamics (MW/rad).
    pub sync_stiffness: f64,
}

/// Hourly load and solar capacity-factor series for one region-year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    pub region: String,
    /// 1-based planning year index.
    pub year: usize,
    pub load_mw: Vec<f64>,
    pub solar_cf: Vec<f64>,
}

/// The full input to partitioning and expansion optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningCase {
    pub horizon: PlanningHorizon,
    pub regions: Vec<Region>,
    pub units: Vec<UnitGroup>,
    pub interfaces: Vec<Interface>,
    pub series: Vec<HourlySeries>,
}

impl PlanningCase {
    pub fn region(&self, id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    pub fn region_index(&self, id: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.id == id)
    }

    pub fn units_in<'a>(&'a self, region: &str) -> impl Iterator<Item = &'a UnitGroup> + 'a {
        let region = region.to_string();
        self.units.iter().filter(move |u| u.region == region)
    }

    /// The (at most one) PV unit group of a region.
    pub fn pv_group(&self, region: &str) -> Option<&UnitGroup> {
        self.units_in(region).find(|u| u.kind == UnitKind::Pv)
    }

    pub fn series_for(&self, region: &str, year: usize) -> Option<&HourlySeries> {
        self.series
            .iter()
            .find(|s| s.region == region && s.year == year)
    }
}

/// One invariant violation, with a path to the offending field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Dotted path such as `units[coal_n].inertia_h`.
    pub path: String,
    pub message: String,
}

/// Outcome of [`validate_case`]: empty iff the case satisfies every invariant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

fn check_per_year(report: &mut ValidationReport, path: &str, values: &[f64], n_years: usize) {
    if values.len() != n_years {
        report.push(
            path,
            format!("expected {} per-year values, found {}", n_years, values.len()),
        );
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v < 0.0 {
            report.push(format!("{path}[{i}]"), format!("must be finite and >= 0, got {v}"));
        }
    }
}

/// Checks every domain invariant of `case` and reports each violation.
/// Violations are data, not errors; an invalid case still produces a report.
pub fn validate_case(case: &PlanningCase) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n_years = case.horizon.n_years;

    if n_years < 1 {
        report.push("horizon.n_years", "must be >= 1");
    }
    if !(case.horizon.discount_rate > 0.0) {
        report.push("horizon.discount_rate", "must be > 0");
    }
    if case.horizon.hours_per_year == 0 {
        report.push("horizon.hours_per_year", "must be > 0");
    }

    let mut seen = std::collections::BTreeSet::new();
    for region in &case.regions {
        let p = format!("regions[{}]", region.id);
        if !seen.insert(region.id.clone()) {
            report.push(&p, "duplicate region id");
        }
        check_per_year(&mut report, &format!("{p}.pv_build_cost_by_year"), &region.pv_build_cost_by_year, n_years);
        check_per_year(&mut report, &format!("{p}.land_cost_by_year"), &region.land_cost_by_year, n_years);
        check_per_year(&mut report, &format!("{p}.pv_build_limit_by_year"), &region.pv_build_limit_by_year, n_years);
        check_per_year(&mut report, &format!("{p}.reserve_margin_by_year"), &region.reserve_margin_by_year, n_years);
        check_per_year(&mut report, &format!("{p}.rps_by_year"), &region.rps_by_year, n_years);
        for (i, rps) in region.rps_by_year.iter().enumerate() {
            if *rps > 1.0 {
                report.push(format!("{p}.rps_by_year[{i}]"), "must be within [0, 1]");
            }
        }
        if region.voll < 0.0 {
            report.push(format!("{p}.voll"), "must be >= 0");
        }
        if !(0.0..=1.0).contains(&region.maintenance_factor) {
            report.push(format!("{p}.maintenance_factor"), "must be within [0, 1]");
        }
        if region.validated_dispatch_total < 0.0 {
            report.push(format!("{p}.validated_dispatch_total"), "must be >= 0");
        }
    }

    let mut seen_units = std::collections::BTreeSet::new();
    let mut pv_per_region = std::collections::BTreeMap::<String, usize>::new();
    for unit in &case.units {
        let p = format!("units[{}]", unit.id);
        if !seen_units.insert(unit.id.clone()) {
            report.push(&p, "duplicate unit group id");
        }
        if case.region(&unit.region).is_none() {
            report.push(
                format!("{p}.region"),
                format!("dangling region id \"{}\"", unit.region),
            );
        }
        if !(unit.p_max > 0.0) {
            report.push(format!("{p}.p_max"), "must be > 0");
        }
        for (field, v) in [
            ("fixed_om", unit.fixed_om),
            ("var_om", unit.var_om),
            ("heat_rate", unit.heat_rate),
            ("emission_coeff", unit.emission_coeff),
            ("validated_dispatch", unit.validated_dispatch),
        ] {
            if !v.is_finite() || v < 0.0 {
                report.push(format!("{p}.{field}"), format!("must be finite and >= 0, got {v}"));
            }
        }
        check_per_year(&mut report, &format!("{p}.fuel_price_by_year"), &unit.fuel_price_by_year, n_years);
        check_per_year(&mut report, &format!("{p}.emission_price_by_year"), &unit.emission_price_by_year, n_years);
        for (field, v) in [
            ("forced_outage_rate", unit.forced_outage_rate),
            ("maintenance_outage_rate", unit.maintenance_outage_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                report.push(format!("{p}.{field}"), "must be within [0, 1]");
            }
        }
        if unit.kind == UnitKind::Pv {
            if unit.inertia_h != 0.0 {
                report.push(format!("{p}.inertia_h"), "inertia_h must be 0 for pv");
            }
            *pv_per_region.entry(unit.region.clone()).or_default() += 1;
        } else if unit.inertia_h < 0.0 {
            report.push(format!("{p}.inertia_h"), "must be >= 0");
        }
        if unit.kind.is_conventional() && !(unit.governor_droop > 0.0) {
            report.push(
                format!("{p}.governor_droop"),
                "must be > 0 for conventional kinds",
            );
        }
    }
    for (region, n) in &pv_per_region {
        if *n > 1 {
            report.push(
                format!("units(region={region})"),
                "at most one pv unit group per region",
            );
        }
    }

    let mut seen_ifaces = std::collections::BTreeSet::new();
    for iface in &case.interfaces {
        let p = format!("interfaces[{}]", iface.id);
        if !seen_ifaces.insert(iface.id.clone()) {
            report.push(&p, "duplicate interface id");
        }
        for (field, id) in [("from_region", &iface.from_region), ("to_region", &iface.to_region)] {
            if case.region(id).is_none() {
                report.push(format!("{p}.{field}"), format!("dangling region id \"{id}\""));
            }
        }
        if iface.from_region == iface.to_region {
            report.push(&p, "from_region and to_region must differ");
        }
        if iface.capacity < 0.0 {
            report.push(format!("{p}.capacity"), "must be >= 0");
        }
        if iface.wheeling_price < 0.0 {
            report.push(format!("{p}.wheeling_price"), "must be >= 0");
        }
        if !(iface.sync_stiffness > 0.0) {
            report.push(format!("{p}.sync_stiffness"), "must be > 0");
        }
    }

    // One series per (region, year), each covering the full model year.
    for region in &case.regions {
        for year in 1..=n_years {
            match case.series_for(&region.id, year) {
                None => report.push(
                    format!("series({}, {})", region.id, year),
                    "missing hourly series",
                ),
                Some(s) => {
                    let p = format!("series[{}_{}]", s.region, s.year);
                    if s.load_mw.len() != case.horizon.hours_per_year {
                        report.push(
                            format!("{p}.load_mw"),
                            format!(
                                "expected {} hours, found {}",
                                case.horizon.hours_per_year,
                                s.load_mw.len()
                            ),
                        );
                    }
                    if s.solar_cf.len() != case.horizon.hours_per_year {
                        report.push(
                            format!("{p}.solar_cf"),
                            format!(
                                "expected {} hours, found {}",
                                case.horizon.hours_per_year,
                                s.solar_cf.len()
                            ),
                        );
                    }
                    for (h, v) in s.load_mw.iter().enumerate() {
                        if !v.is_finite() || *v < 0.0 {
                            report.push(format!("{p}.load_mw[{h}]"), "load must be >= 0");
                        }
                    }
                    for (h, v) in s.solar_cf.iter().enumerate() {
                        if !(0.0..=1.0).contains(v) {
                            report.push(
                                format!("{p}.solar_cf[{h}]"),
                                format!("must be within bounds [0, 1], got {v}"),
                            );
                        }
                    }
                }
            }
        }
    }
    for s in &case.series {
        if case.region(&s.region).is_none() {
            report.push(
                format!("series[{}_{}].region", s.region, s.year),
                format!("dangling region id \"{}\"", s.region),
            );
        } else if s.year < 1 || s.year > n_years {
            report.push(
                format!("series[{}_{}].year", s.region, s.year),
                format!("year out of horizon 1..={n_years}"),
            );
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_case() -> PlanningCase {
        PlanningCase {
            horizon: PlanningHorizon {
                n_years: 1,
                discount_rate: 0.05,
                hours_per_year: 4,
            },
            regions: vec![Region {
                id: "a".into(),
                name: "A".into(),
                pv_build_cost_by_year: vec![1e6],
                land_cost_by_year: vec![2e5],
                pv_build_limit_by_year: vec![5.0],
                voll: 9000.0,
                reserve_margin_by_year: vec![0.0],
                rps_by_year: vec![0.0],
                maintenance_factor: 0.5,
                validated_dispatch_total: 100.0,
            }],
            units: vec![
                UnitGroup {
                    id: "coal_a".into(),
                    region: "a".into(),
                    kind: UnitKind::Coal,
                    p_max: 100.0,
                    existing_count: 1,
                    fixed_om: 1000.0,
                    var_om: 2.0,
                    heat_rate: 10.0,
                    fuel_price_by_year: vec![2.0],
                    emission_coeff: 0.1,
                    emission_price_by_year: vec![30.0],
                    forced_outage_rate: 0.05,
                    maintenance_outage_rate: 0.1,
                    inertia_h: 4.0,
                    governor_droop: 0.05,
                    validated_dispatch: 100.0,
                },
                UnitGroup {
                    id: "pv_a".into(),
                    region: "a".into(),
                    kind: UnitKind::Pv,
                    p_max: 10.0,
                    existing_count: 0,
                    fixed_om: 500.0,
                    var_om: 0.0,
                    heat_rate: 0.0,
                    fuel_price_by_year: vec![0.0],
                    emission_coeff: 0.0,
                    emission_price_by_year: vec![0.0],
                    forced_outage_rate: 0.0,
                    maintenance_outage_rate: 0.0,
                    inertia_h: 0.0,
                    governor_droop: 0.0,
                    validated_dispatch: 0.0,
                },
            ],
            interfaces: vec![],
            series: vec![HourlySeries {
                region: "a".into(),
                year: 1,
                load_mw: vec![50.0, 80.0, 90.0, 60.0],
                solar_cf: vec![0.0, 0.6, 0.8, 0.0],
            }],
        }
    }

    #[test]
    fn valid_case_has_empty_report() {
        let report = validate_case(&small_case());
        assert!(report.is_empty(), "unexpected violations: {:?}", report.violations);
    }

    #[test]
    fn solar_cf_out_of_bounds_is_flagged() {
        let mut case = small_case();
        case.series[0].solar_cf[1] = 1.2;
        let report = validate_case(&case);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].path.contains("solar_cf[1]"));
        assert!(report.violations[0].message.contains("[0, 1]"));
    }

    #[test]
    fn pv_with_inertia_is_flagged() {
        let mut case = small_case();
        case.units[1].inertia_h = 3.0;
        let report = validate_case(&case);
        assert!(report
            .violations
            .iter()
            .any(|v| v.message == "inertia_h must be 0 for pv"));
    }

    #[test]
    fn dangling_region_reference_is_flagged() {
        let mut case = small_case();
        case.units[0].region = "X".into();
        let report = validate_case(&case);
        assert!(report
            .violations
            .iter()
            .any(|v| v.message.contains("\"X\"")));
    }

    #[test]
    fn displacement_priority_excludes_renewables() {
        assert!(UnitKind::Wind.displacement_priority().is_none());
        assert!(UnitKind::Pv.displacement_priority().is_none());
        assert!(UnitKind::Retiring.displacement_priority() < UnitKind::Oil.displacement_priority());
        assert!(UnitKind::Nuclear.displacement_priority() < UnitKind::Hydro.displacement_priority());
    }
}
