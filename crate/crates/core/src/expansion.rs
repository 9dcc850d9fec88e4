//! The PV expansion co-optimization model.
//!
//! Builds a solver-agnostic mixed-integer program: present-value cost
//! objective (PV expansion, fixed/variable O&M, fuel, emissions, wheeling,
//! lost load) subject to regional balance, build-speed limits, outage
//! derating, capacity adequacy, interface limits, renewable portfolio
//! floors, solar availability, and the dynamic-model compatibility cap.
//! Also evaluates cost breakdowns and audits solutions independently of any
//! solver.
//!
//! Conventions adopted here:
//! - Dispatch variables and solution arrays are *total group MW*; for a
//!   conventional group that equals per-unit output times the existing
//!   count, for a PV fleet it is the whole fleet's output.
//! - The outage derate is `1 - F_MOR * MF - F_FOR`, clamped to [0, 1]
//!   (available capacity is smaller than installed capacity).
//! - The emission coefficient is per MBtu by default, so the emission term
//!   carries the heat rate; set `emission_per_mwh` to read it per MWh.
//! - Interface flow is positive from `from_region` to `to_region`; wheeling
//!   is charged on |flow| via two non-negative direction variables.
//! - Unserved power is bounded by the regional load and also backs the
//!   adequacy constraint, so undersized systems stay feasible at VOLL
//!   prices instead of going infeasible.

use serde::{Deserialize, Serialize};

use crate::blocks::{BlockSchedule, TimeBlock};
use crate::bundle::ExpansionConfig;
use crate::data::{PlanningCase, PlanningHorizon, UnitKind};
use crate::lp::{Constraint, LinearProgramSpec, Sense, VarKey};

#[derive(Debug, thiserror::Error)]
pub enum ExpansionError {
    #[error("discount rate must be > 0 (end-year term undefined at d = 0)")]
    NonPositiveDiscount,
    #[error("horizon must cover at least one year")]
    EmptyHorizon,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Present-value coefficients per planning year. The final year carries a
/// perpetuity tail (the end-year effect) so terminal-year costs stand in
/// for all later years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscountSchedule {
    /// `d_y[y - 1]` is the coefficient of year `y` (1-based).
    pub d_y: Vec<f64>,
}

impl DiscountSchedule {
    pub fn coefficient(&self, year: usize) -> f64 {
        self.d_y[year - 1]
    }
}

pub fn build_discount_schedule(
    horizon: &PlanningHorizon,
) -> Result<DiscountSchedule, ExpansionError> {
    let d = horizon.discount_rate;
    let n = horizon.n_years;
    if !(d > 0.0) {
        return Err(ExpansionError::NonPositiveDiscount);
    }
    if n < 1 {
        return Err(ExpansionError::EmptyHorizon);
    }
    let mut d_y = Vec::with_capacity(n);
    for y in 1..=n {
        let base = (1.0 + d).powi(-(y as i32));
        if y == n {
            let tail = (1.0 + d).powi(-(n as i32 + 1)) / (1.0 - 1.0 / (1.0 + d));
            d_y.push(base + tail);
        } else {
            d_y.push(base);
        }
    }
    Ok(DiscountSchedule { d_y })
}

/// The seven present-value cost terms of the objective.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub pv_expansion: f64,
    pub fixed_om: f64,
    pub var_om: f64,
    pub fuel: f64,
    pub emission: f64,
    pub wheeling: f64,
    pub lost_load: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.pv_expansion
            + self.fixed_om
            + self.var_om
            + self.fuel
            + self.emission
            + self.wheeling
            + self.lost_load;
        self
    }
}

/// Decision arrays of one expansion optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSolution {
    /// `pv_built[r][y - 1]`: integer PV units built.
    pub pv_built: Vec<Vec<u32>>,
    /// `dispatch[g][y - 1][s]`: total group MW.
    pub dispatch: Vec<Vec<Vec<f64>>>,
    /// `unserved[r][y - 1][s]`: MW.
    pub unserved: Vec<Vec<Vec<f64>>>,
    /// `flows[l][y - 1][s]`: signed MW, positive from->to.
    pub flows: Vec<Vec<Vec<f64>>>,
    pub cost_breakdown: CostBreakdown,
}

impl ExpansionSolution {
    /// Cumulative PV units built in region `r` through year `y` (1-based).
    pub fn cum_built(&self, region: usize, year: usize) -> u32 {
        self.pv_built[region][..year].iter().sum()
    }

    /// PV capacity (existing + built) of region `r` at year `y` in MW.
    pub fn pv_capacity(&self, case: &PlanningCase, region: usize, year: usize) -> f64 {
        match case.pv_group(&case.regions[region].id) {
            None => 0.0,
            Some(pv) => {
                pv.p_max * (pv.existing_count as f64 + self.cum_built(region, year) as f64)
            }
        }
    }

    /// An all-zero solution shaped like `case`/`sched`; useful as a base for
    /// hand-built tests and audits.
    pub fn zeros(case: &PlanningCase, sched: &BlockSchedule) -> Self {
        let years = case.horizon.n_years;
        let per_year: Vec<Vec<f64>> = (1..=years)
            .map(|y| vec![0.0; sched.n_blocks(y)])
            .collect();
        Self {
            pv_built: vec![vec![0; years]; case.regions.len()],
            dispatch: vec![per_year.clone(); case.units.len()],
            unserved: vec![per_year.clone(); case.regions.len()],
            flows: vec![per_year; case.interfaces.len()],
            cost_breakdown: CostBreakdown::default(),
        }
    }
}

fn check_dims(
    case: &PlanningCase,
    sched: &BlockSchedule,
    sol: &ExpansionSolution,
) -> Result<(), ExpansionError> {
    let years = case.horizon.n_years;
    if sol.pv_built.len() != case.regions.len()
        || sol.dispatch.len() != case.units.len()
        || sol.unserved.len() != case.regions.len()
        || sol.flows.len() != case.interfaces.len()
    {
        return Err(ExpansionError::DimensionMismatch(
            "solution entity counts do not match the case".into(),
        ));
    }
    for b in &sol.pv_built {
        if b.len() != years {
            return Err(ExpansionError::DimensionMismatch(
                "pv_built year count".into(),
            ));
        }
    }
    for arr in sol
        .dispatch
        .iter()
        .chain(sol.unserved.iter())
        .chain(sol.flows.iter())
    {
        if arr.len() != years {
            return Err(ExpansionError::DimensionMismatch("year count".into()));
        }
        for (y, blocks) in arr.iter().enumerate() {
            if blocks.len() != sched.n_blocks(y + 1) {
                return Err(ExpansionError::DimensionMismatch(format!(
                    "block count in year {}",
                    y + 1
                )));
            }
        }
    }
    Ok(())
}

/// Evaluates every cost term of a solution directly from its defining
/// formula, independent of any solver or of the LP coefficients.
pub fn evaluate_cost_breakdown(
    case: &PlanningCase,
    sched: &BlockSchedule,
    sol: &ExpansionSolution,
    cfg: &ExpansionConfig,
) -> Result<CostBreakdown, ExpansionError> {
    check_dims(case, sched, sol)?;
    let discount = build_discount_schedule(&case.horizon)?;
    let t = case.horizon.hours_per_year as f64;
    let mut out = CostBreakdown::default();

    for y in 1..=case.horizon.n_years {
        let dy = discount.coefficient(y);

        for (r, region) in case.regions.iter().enumerate() {
            out.pv_expansion += dy
                * (region.pv_build_cost_by_year[y - 1] + region.land_cost_by_year[y - 1])
                * sol.pv_built[r][y - 1] as f64;
        }

        for (g, unit) in case.units.iter().enumerate() {
            let r = case.region_index(&unit.region).ok_or_else(|| {
                ExpansionError::DimensionMismatch(format!("unit {} region", unit.id))
            })?;
            let count = if unit.kind == UnitKind::Pv {
                unit.existing_count as f64 + sol.cum_built(r, y) as f64
            } else {
                unit.existing_count as f64
            };
            out.fixed_om += dy * unit.fixed_om * unit.p_max * count;

            for block in sched.blocks_for_year(y) {
                let df = block.duration_fraction;
                let p = sol.dispatch[g][y - 1][block.block];
                out.var_om += dy * t * df * unit.var_om * p;
                out.fuel += dy * t * df * unit.heat_rate * unit.fuel_price_by_year[y - 1] * p;
                let heat = if cfg.emission_per_mwh { 1.0 } else { unit.heat_rate };
                out.emission +=
                    dy * unit.emission_price_by_year[y - 1] * unit.emission_coeff * heat * t * df * p;
            }
        }

        for (l, iface) in case.interfaces.iter().enumerate() {
            for block in sched.blocks_for_year(y) {
                out.wheeling += dy
                    * t
                    * block.duration_fraction
                    * iface.wheeling_price
                    * sol.flows[l][y - 1][block.block].abs();
            }
        }

        for (r, region) in case.regions.iter().enumerate() {
            for block in sched.blocks_for_year(y) {
                out.lost_load += dy
                    * t
                    * block.duration_fraction
                    * region.voll
                    * sol.unserved[r][y - 1][block.block];
            }
        }
    }
    Ok(out.finish())
}

fn block_load(block: &TimeBlock, r: usize) -> f64 {
    block.load_by_region[r]
}

/// Assembles the full expansion program over `case` and `sched`.
pub fn build_expansion_lp(
    case: &PlanningCase,
    sched: &BlockSchedule,
    cfg: &ExpansionConfig,
) -> Result<LinearProgramSpec, ExpansionError> {
    let discount = build_discount_schedule(&case.horizon)?;
    let t = case.horizon.hours_per_year as f64;
    let years = case.horizon.n_years;
    let mut spec = LinearProgramSpec {
        name: "pv_expansion".into(),
        ..Default::default()
    };

    // --- variables ------------------------------------------------------
    for (r, region) in case.regions.iter().enumerate() {
        let has_pv = case.pv_group(&region.id).is_some();
        for y in 1..=years {
            let limit = if has_pv {
                region.pv_build_limit_by_year[y - 1]
            } else {
                0.0
            };
            spec.add_variable(
                VarKey::PvBuild { region: r, year: y },
                format!("build_{}_{y}", region.id),
                0.0,
                limit.floor(),
                true,
            );
        }
    }
    for (g, unit) in case.units.iter().enumerate() {
        if unit.kind == UnitKind::Pv {
            continue;
        }
        let region = case.region(&unit.region).expect("validated case");
        let derate = unit.derate_factor(region.maintenance_factor);
        let cap = derate * unit.p_max * unit.existing_count as f64;
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                spec.add_variable(
                    VarKey::Dispatch { unit: g, year: y, block: block.block },
                    format!("p_{}_{y}_{}", unit.id, block.block),
                    0.0,
                    cap,
                    false,
                );
            }
        }
    }
    for (r, region) in case.regions.iter().enumerate() {
        if case.pv_group(&region.id).is_none() {
            continue;
        }
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                spec.add_variable(
                    VarKey::PvDispatch { region: r, year: y, block: block.block },
                    format!("pv_{}_{y}_{}", region.id, block.block),
                    0.0,
                    f64::INFINITY,
                    false,
                );
            }
        }
    }
    for (r, region) in case.regions.iter().enumerate() {
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                spec.add_variable(
                    VarKey::Unserved { region: r, year: y, block: block.block },
                    format!("usp_{}_{y}_{}", region.id, block.block),
                    0.0,
                    block_load(block, r).max(0.0),
                    false,
                );
            }
        }
    }
    for (l, iface) in case.interfaces.iter().enumerate() {
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                for (key, tag) in [
                    (VarKey::FlowPos { iface: l, year: y, block: block.block }, "fwd"),
                    (VarKey::FlowNeg { iface: l, year: y, block: block.block }, "rev"),
                ] {
                    spec.add_variable(
                        key,
                        format!("flow_{}_{tag}_{y}_{}", iface.id, block.block),
                        0.0,
                        iface.capacity,
                        false,
                    );
                }
            }
        }
    }

    // --- objective --------------------------------------------------------
    for (r, region) in case.regions.iter().enumerate() {
        let pv = case.pv_group(&region.id);
        for y in 1..=years {
            let dy = discount.coefficient(y);
            let j = spec.var(VarKey::PvBuild { region: r, year: y });
            spec.objective[j] +=
                dy * (region.pv_build_cost_by_year[y - 1] + region.land_cost_by_year[y - 1]);
            // Fixed O&M accrues on a built unit from its build year onward.
            if let Some(pv) = pv {
                for y2 in y..=years {
                    spec.objective[j] += discount.coefficient(y2) * pv.fixed_om * pv.p_max;
                }
            }
        }
    }
    for (g, unit) in case.units.iter().enumerate() {
        let r = case.region_index(&unit.region).expect("validated case");
        for y in 1..=years {
            let dy = discount.coefficient(y);
            // Existing-fleet fixed O&M is decision-independent.
            spec.objective_constant +=
                dy * unit.fixed_om * unit.p_max * unit.existing_count as f64;

            for block in sched.blocks_for_year(y) {
                let df = block.duration_fraction;
                let heat = if cfg.emission_per_mwh { 1.0 } else { unit.heat_rate };
                let per_mwh = unit.var_om
                    + unit.heat_rate * unit.fuel_price_by_year[y - 1]
                    + unit.emission_price_by_year[y - 1] * unit.emission_coeff * heat;
                let key = if unit.kind == UnitKind::Pv {
                    VarKey::PvDispatch { region: r, year: y, block: block.block }
                } else {
                    VarKey::Dispatch { unit: g, year: y, block: block.block }
                };
                let j = spec.var(key);
                spec.objective[j] += dy * t * df * per_mwh;
            }
        }
    }
    for (l, iface) in case.interfaces.iter().enumerate() {
        for y in 1..=years {
            let dy = discount.coefficient(y);
            for block in sched.blocks_for_year(y) {
                let c = dy * t * block.duration_fraction * iface.wheeling_price;
                for key in [
                    VarKey::FlowPos { iface: l, year: y, block: block.block },
                    VarKey::FlowNeg { iface: l, year: y, block: block.block },
                ] {
                    let j = spec.var(key);
                    spec.objective[j] += c;
                }
            }
        }
    }
    for (r, region) in case.regions.iter().enumerate() {
        for y in 1..=years {
            let dy = discount.coefficient(y);
            for block in sched.blocks_for_year(y) {
                let j = spec.var(VarKey::Unserved { region: r, year: y, block: block.block });
                spec.objective[j] += dy * t * block.duration_fraction * region.voll;
            }
        }
    }

    // --- constraints ------------------------------------------------------
    for (r, region) in case.regions.iter().enumerate() {
        let conv_units: Vec<usize> = case
            .units
            .iter()
            .enumerate()
            .filter(|(_, u)| u.region == region.id && u.kind != UnitKind::Pv)
            .map(|(g, _)| g)
            .collect();
        let pv = case.pv_group(&region.id);
        let conv_derated_cap: f64 = conv_units
            .iter()
            .map(|&g| {
                let u = &case.units[g];
                u.derate_factor(region.maintenance_factor) * u.p_max * u.existing_count as f64
            })
            .sum();

        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                let s = block.block;
                let cf = block.pv_cf_by_region[r];
                let load = block_load(block, r);

                // Regional power balance (one equality per region-year-block).
                let mut row: Vec<(usize, f64)> = conv_units
                    .iter()
                    .map(|&g| (spec.var(VarKey::Dispatch { unit: g, year: y, block: s }), 1.0))
                    .collect();
                if pv.is_some() {
                    row.push((spec.var(VarKey::PvDispatch { region: r, year: y, block: s }), 1.0));
                }
                row.push((spec.var(VarKey::Unserved { region: r, year: y, block: s }), 1.0));
                for (l, iface) in case.interfaces.iter().enumerate() {
                    let sign = if iface.to_region == region.id {
                        1.0
                    } else if iface.from_region == region.id {
                        -1.0
                    } else {
                        continue;
                    };
                    row.push((spec.var(VarKey::FlowPos { iface: l, year: y, block: s }), sign));
                    row.push((spec.var(VarKey::FlowNeg { iface: l, year: y, block: s }), -sign));
                }
                spec.constraints.push(Constraint {
                    name: format!("balance_{}_{y}_{s}", region.id),
                    row,
                    sense: Sense::Eq,
                    rhs: load,
                });

                // PV output limited by solar availability.
                if let Some(pv) = pv {
                    let mut row = vec![(
                        spec.var(VarKey::PvDispatch { region: r, year: y, block: s }),
                        1.0,
                    )];
                    for y2 in 1..=y {
                        row.push((
                            spec.var(VarKey::PvBuild { region: r, year: y2 }),
                            -cf * pv.p_max,
                        ));
                    }
                    spec.constraints.push(Constraint {
                        name: format!("pv_avail_{}_{y}_{s}", region.id),
                        row,
                        sense: Sense::Le,
                        rhs: cf * pv.p_max * pv.existing_count as f64,
                    });
                }

                // Capacity adequacy: derated capacity + available PV capacity
                // (+ unserved slack) covers load and reserve.
                let mut row = vec![(
                    spec.var(VarKey::Unserved { region: r, year: y, block: s }),
                    1.0,
                )];
                let mut rhs = load + region.reserve_margin_by_year[y - 1] - conv_derated_cap;
                if let Some(pv) = pv {
                    rhs -= cf * pv.p_max * pv.existing_count as f64;
                    for y2 in 1..=y {
                        row.push((
                            spec.var(VarKey::PvBuild { region: r, year: y2 }),
                            cf * pv.p_max,
                        ));
                    }
                }
                spec.constraints.push(Constraint {
                    name: format!("adequacy_{}_{y}_{s}", region.id),
                    row,
                    sense: Sense::Ge,
                    rhs,
                });
            }

            if let Some(pv) = pv {
                // Renewable portfolio floor on PV capacity share.
                let rps = region.rps_by_year[y - 1];
                if rps > 0.0 {
                    let nonpv_cap: f64 = conv_units
                        .iter()
                        .map(|&g| case.units[g].p_max * case.units[g].existing_count as f64)
                        .sum();
                    let row: Vec<(usize, f64)> = (1..=y)
                        .map(|y2| {
                            (
                                spec.var(VarKey::PvBuild { region: r, year: y2 }),
                                (1.0 - rps) * pv.p_max,
                            )
                        })
                        .collect();
                    spec.constraints.push(Constraint {
                        name: format!("rps_{}_{y}", region.id),
                        row,
                        sense: Sense::Ge,
                        rhs: rps * nonpv_cap
                            - (1.0 - rps) * pv.p_max * pv.existing_count as f64,
                    });
                }

                // Dynamic-model compatibility cap on total PV capacity.
                let row: Vec<(usize, f64)> = (1..=y)
                    .map(|y2| (spec.var(VarKey::PvBuild { region: r, year: y2 }), pv.p_max))
                    .collect();
                spec.constraints.push(Constraint {
                    name: format!("compat_{}_{y}", region.id),
                    row,
                    sense: Sense::Le,
                    rhs: region.validated_dispatch_total
                        - pv.p_max * pv.existing_count as f64,
                });
            }
        }
    }

    spec.check()
        .map_err(|e| ExpansionError::DimensionMismatch(e.to_string()))?;
    Ok(spec)
}

/// Reads decision arrays out of a variable assignment produced by the solver.
pub fn extract_solution(
    case: &PlanningCase,
    sched: &BlockSchedule,
    spec: &LinearProgramSpec,
    values: &[f64],
    cfg: &ExpansionConfig,
) -> Result<ExpansionSolution, ExpansionError> {
    let years = case.horizon.n_years;
    let mut sol = ExpansionSolution::zeros(case, sched);
    for (r, region) in case.regions.iter().enumerate() {
        for y in 1..=years {
            let v = values[spec.var(VarKey::PvBuild { region: r, year: y })];
            sol.pv_built[r][y - 1] = v.round().max(0.0) as u32;
        }
        if case.pv_group(&region.id).is_some() {
            let g = case
                .units
                .iter()
                .position(|u| u.region == region.id && u.kind == UnitKind::Pv)
                .expect("pv group present");
            for y in 1..=years {
                for block in sched.blocks_for_year(y) {
                    sol.dispatch[g][y - 1][block.block] = values
                        [spec.var(VarKey::PvDispatch { region: r, year: y, block: block.block })];
                }
            }
        }
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                sol.unserved[r][y - 1][block.block] =
                    values[spec.var(VarKey::Unserved { region: r, year: y, block: block.block })];
            }
        }
    }
    for (g, unit) in case.units.iter().enumerate() {
        if unit.kind == UnitKind::Pv {
            continue;
        }
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                sol.dispatch[g][y - 1][block.block] =
                    values[spec.var(VarKey::Dispatch { unit: g, year: y, block: block.block })];
            }
        }
    }
    for l in 0..case.interfaces.len() {
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                let s = block.block;
                sol.flows[l][y - 1][s] = values
                    [spec.var(VarKey::FlowPos { iface: l, year: y, block: s })]
                    - values[spec.var(VarKey::FlowNeg { iface: l, year: y, block: s })];
            }
        }
    }
    sol.cost_breakdown = evaluate_cost_breakdown(case, sched, &sol, cfg)?;
    Ok(sol)
}

// ---------------------------------------------------------------------------
// Solution audit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResidual {
    pub family: String,
    pub max_residual: f64,
    /// Where the worst residual occurs (region/unit/interface, year, block).
    pub at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub families: Vec<FamilyResidual>,
    pub tol: f64,
    pub pass: bool,
}

impl AuditReport {
    pub fn max_residual(&self) -> f64 {
        self.families
            .iter()
            .map(|f| f.max_residual)
            .fold(0.0, f64::max)
    }
}

/// Re-evaluates every constraint family directly from the case data,
/// independent of the LP assembly, and reports the worst violation of each.
pub fn audit_solution(
    case: &PlanningCase,
    sched: &BlockSchedule,
    sol: &ExpansionSolution,
    tol: f64,
) -> Result<AuditReport, ExpansionError> {
    check_dims(case, sched, sol)?;
    let years = case.horizon.n_years;
    let mut families: Vec<FamilyResidual> = Vec::new();
    let mut record = |family: &str, residual: f64, at: String| {
        match families.iter_mut().find(|f| f.family == family) {
            Some(f) => {
                if residual > f.max_residual {
                    f.max_residual = residual;
                    f.at = at;
                }
            }
            None => families.push(FamilyResidual {
                family: family.into(),
                max_residual: residual,
                at,
            }),
        }
    };

    for (r, region) in case.regions.iter().enumerate() {
        let conv_units: Vec<usize> = case
            .units
            .iter()
            .enumerate()
            .filter(|(_, u)| u.region == region.id && u.kind != UnitKind::Pv)
            .map(|(g, _)| g)
            .collect();
        let pv = case.pv_group(&region.id);
        let pv_g = case
            .units
            .iter()
            .position(|u| u.region == region.id && u.kind == UnitKind::Pv);

        for y in 1..=years {
            let pv_cap = sol.pv_capacity(case, r, y);

            // Eq. (11): annual build limit.
            record(
                "build_limit",
                sol.pv_built[r][y - 1] as f64 - region.pv_build_limit_by_year[y - 1],
                format!("{}:{}", region.id, y),
            );

            // Eq. (15): RPS capacity floor.
            let rps = region.rps_by_year[y - 1];
            if rps > 0.0 {
                let nonpv_cap: f64 = conv_units
                    .iter()
                    .map(|&g| case.units[g].p_max * case.units[g].existing_count as f64)
                    .sum();
                record(
                    "rps",
                    rps * (nonpv_cap + pv_cap) - pv_cap,
                    format!("{}:{}", region.id, y),
                );
            }

            // Eq. (17): compatibility with the validated dynamic model.
            record(
                "compatibility",
                pv_cap - region.validated_dispatch_total,
                format!("{}:{}", region.id, y),
            );

            for block in sched.blocks_for_year(y) {
                let s = block.block;
                let cf = block.pv_cf_by_region[r];
                let load = block.load_by_region[r];

                // Eq. (10): regional balance.
                let mut gen: f64 = conv_units
                    .iter()
                    .map(|&g| sol.dispatch[g][y - 1][s])
                    .sum();
                if let Some(g) = pv_g {
                    gen += sol.dispatch[g][y - 1][s];
                }
                let mut net_import = 0.0;
                for (l, iface) in case.interfaces.iter().enumerate() {
                    if iface.to_region == region.id {
                        net_import += sol.flows[l][y - 1][s];
                    } else if iface.from_region == region.id {
                        net_import -= sol.flows[l][y - 1][s];
                    }
                }
                record(
                    "balance",
                    (gen + sol.unserved[r][y - 1][s] + net_import - load).abs(),
                    format!("{}:{}:{}", region.id, y, s),
                );

                // Eq. (12): derated dispatch caps.
                for &g in &conv_units {
                    let u = &case.units[g];
                    let cap = u.derate_factor(region.maintenance_factor)
                        * u.p_max
                        * u.existing_count as f64;
                    record(
                        "capacity_derate",
                        sol.dispatch[g][y - 1][s] - cap,
                        format!("{}:{}:{}", u.id, y, s),
                    );
                }

                // Eq. (16): PV availability.
                if let Some(g) = pv_g {
                    record(
                        "pv_availability",
                        sol.dispatch[g][y - 1][s] - cf * pv_cap,
                        format!("{}:{}:{}", region.id, y, s),
                    );
                }

                // Eq. (13): adequacy with unserved slack.
                let conv_derated: f64 = conv_units
                    .iter()
                    .map(|&g| {
                        let u = &case.units[g];
                        u.derate_factor(region.maintenance_factor)
                            * u.p_max
                            * u.existing_count as f64
                    })
                    .sum();
                let pv_avail = if pv.is_some() { cf * pv_cap } else { 0.0 };
                record(
                    "adequacy",
                    load + region.reserve_margin_by_year[y - 1]
                        - conv_derated
                        - pv_avail
                        - sol.unserved[r][y - 1][s],
                    format!("{}:{}:{}", region.id, y, s),
                );

                // Unserved stays within the regional load.
                record(
                    "unserved_bound",
                    sol.unserved[r][y - 1][s].max(0.0) - load.max(0.0)
                        + sol.unserved[r][y - 1][s].min(0.0).abs(),
                    format!("{}:{}:{}", region.id, y, s),
                );
            }
        }
    }

    // Eq. (14): interface limits.
    for (l, iface) in case.interfaces.iter().enumerate() {
        for y in 1..=years {
            for block in sched.blocks_for_year(y) {
                let s = block.block;
                record(
                    "interface_limit",
                    sol.flows[l][y - 1][s].abs() - iface.capacity,
                    format!("{}:{}:{}", iface.id, y, s),
                );
            }
        }
    }

    for f in &mut families {
        f.max_residual = f.max_residual.max(0.0);
    }
    let pass = families.iter().all(|f| f.max_residual <= tol);
    Ok(AuditReport { families, tol, pass })
}
