//! High-PV operating scenario construction.
//!
//! Starting from the validated operating point (every unit group at its
//! validated dispatch), a target PV penetration level is realized by adding
//! PV output and displacing an equal amount of conventional dispatch, so
//! every regional balance is preserved and no tie flow changes.
//!
//! Displacement follows a fixed technology order: scheduled-retiring plants
//! first, then oil, coal, gas, nuclear, and hydro last. Wind and PV are never
//! displaced. Within a region the plan removes whole units greedily and
//! finishes with at most one partial down-scaling of a remaining group, so
//! rotating inertia is only lost in whole-unit steps.
//!
//! PV output is allocated across regions in proportion to each region's
//! available PV (capacity factor times installed PV capacity), capped by the
//! region's displaceable conventional dispatch; any capped remainder is
//! redistributed to the other regions.

use serde::{Deserialize, Serialize};

use crate::data::{PlanningCase, UnitKind};

pub const NOMINAL_FREQUENCY_HZ: f64 = 60.0;

const MW_EPS: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("penetration level must be within [0, 1), got {0}")]
    InvalidLevel(f64),
    #[error(
        "penetration level {level} is unbuildable: needs {needed_mw:.3} MW of PV output \
         but only {available_mw:.3} MW can be absorbed"
    )]
    Shortfall {
        level: f64,
        needed_mw: f64,
        available_mw: f64,
    },
    #[error("region {region}: cannot displace {needed_mw:.3} MW, only {displaceable_mw:.3} MW of candidate dispatch")]
    Undisplaceable {
        region: String,
        needed_mw: f64,
        displaceable_mw: f64,
    },
    #[error("per-region input length {got} does not match the case's {want} regions")]
    RegionCount { want: usize, got: usize },
}

/// How one unit group is modified by a displacement plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitDisplacement {
    pub unit_id: String,
    pub region: String,
    /// Whole units taken offline (inertia removed with them).
    pub units_removed: u32,
    /// Output scale applied to the units left online (1.0 = untouched;
    /// below 1.0 the units stay online, keeping their inertia).
    pub remaining_scale: f64,
    pub mw_removed: f64,
}

/// A complete recipe turning the validated operating point into a high-PV one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementPlan {
    /// Target PV share of system load.
    pub level: f64,
    /// PV output the plan injects (MW), equal to the dispatch it removes.
    pub target_mw: f64,
    /// PV output injected per region, indexed like the case's regions.
    pub pv_mw_by_region: Vec<f64>,
    pub actions: Vec<UnitDisplacement>,
}

/// One aggregated machine per region for the reduced-order simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMachine {
    pub region: String,
    /// Machine base: online conventional capacity (MVA).
    pub rated_mva: f64,
    /// Capacity-weighted aggregate inertia constant on `rated_mva` (s).
    pub inertia_h: f64,
    /// Aggregate governor droop (per unit); capacity-weighted harmonic mean.
    pub droop: f64,
    /// Mechanical power at the operating point (MW).
    pub p_mech: f64,
    /// Upper clamp for governor response (MW).
    pub p_max: f64,
    /// PV injection (MW), constant unless the simulator applies PV droop.
    pub pv_mw: f64,
    /// Non-synchronous fixed injection such as wind (MW).
    pub fixed_mw: f64,
    pub load_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tie {
    pub from: usize,
    pub to: usize,
    /// Synchronizing stiffness (MW/rad).
    pub stiffness: f64,
}

/// A ready-to-simulate multi-area case at one penetration level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicCase {
    pub level: f64,
    pub f0_hz: f64,
    pub machines: Vec<RegionMachine>,
    pub ties: Vec<Tie>,
    pub plan: DisplacementPlan,
}

impl DynamicCase {
    pub fn system_load(&self) -> f64 {
        self.machines.iter().map(|m| m.load_mw).sum()
    }

    /// Total stored kinetic energy proxy: sum of H * S over machines (MW*s).
    pub fn total_inertia_mws(&self) -> f64 {
        self.machines
            .iter()
            .map(|m| m.inertia_h * m.rated_mva)
            .sum()
    }

    pub fn machine_index(&self, region: &str) -> Option<usize> {
        self.machines.iter().position(|m| m.region == region)
    }
}

/// Indices of `case.units` within `region` that may be displaced, ordered by
/// technology priority, then descending validated dispatch, then id.
pub fn rank_displacement_candidates(case: &PlanningCase, region: &str) -> Vec<usize> {
    let mut out: Vec<usize> = case
        .units
        .iter()
        .enumerate()
        .filter(|(_, u)| {
            u.region == region
                && u.kind.displacement_priority().is_some()
                && u.existing_count > 0
                && u.validated_dispatch > 0.0
        })
        .map(|(g, _)| g)
        .collect();
    out.sort_by(|&a, &b| {
        let ua = &case.units[a];
        let ub = &case.units[b];
        ua.kind
            .displacement_priority()
            .cmp(&ub.kind.displacement_priority())
            .then(
                ub.validated_dispatch
                    .total_cmp(&ua.validated_dispatch),
            )
            .then(ua.id.cmp(&ub.id))
    });
    out
}

/// Displaceable conventional dispatch of a region at the validated point.
fn displaceable_mw(case: &PlanningCase, region: &str) -> f64 {
    rank_displacement_candidates(case, region)
        .iter()
        .map(|&g| case.units[g].validated_dispatch)
        .sum()
}

/// Splits `target` across regions proportionally to `weights`, never
/// exceeding `caps`; capped remainders are redistributed until the target is
/// met. Assumes `sum(caps) >= target` (checked by the caller).
fn allocate_capped(target: f64, weights: &[f64], caps: &[f64]) -> Vec<f64> {
    let n = weights.len();
    let mut alloc = vec![0.0; n];
    loop {
        let remaining = target - alloc.iter().sum::<f64>();
        if remaining <= MW_EPS {
            break;
        }
        let open: Vec<usize> = (0..n)
            .filter(|&r| caps[r] - alloc[r] > MW_EPS && weights[r] > 0.0)
            .collect();
        if open.is_empty() {
            break;
        }
        let wsum: f64 = open.iter().map(|&r| weights[r]).sum();
        let mut clipped = false;
        for &r in &open {
            let want = alloc[r] + remaining * weights[r] / wsum;
            if want >= caps[r] {
                alloc[r] = caps[r];
                clipped = true;
            } else {
                alloc[r] = want;
            }
        }
        if !clipped {
            break;
        }
    }
    alloc
}

/// Plans the displacement that absorbs `pv_mw_by_region` of PV output.
pub fn build_displacement_plan(
    case: &PlanningCase,
    level: f64,
    pv_mw_by_region: &[f64],
) -> Result<DisplacementPlan, ScenarioError> {
    if pv_mw_by_region.len() != case.regions.len() {
        return Err(ScenarioError::RegionCount {
            want: case.regions.len(),
            got: pv_mw_by_region.len(),
        });
    }
    let mut actions = Vec::new();
    for (r, region) in case.regions.iter().enumerate() {
        let mut remaining = pv_mw_by_region[r];
        if remaining <= MW_EPS {
            continue;
        }
        let pool = displaceable_mw(case, &region.id);
        if remaining > pool + MW_EPS {
            return Err(ScenarioError::Undisplaceable {
                region: region.id.clone(),
                needed_mw: remaining,
                displaceable_mw: pool,
            });
        }
        for g in rank_displacement_candidates(case, &region.id) {
            if remaining <= MW_EPS {
                break;
            }
            let unit = &case.units[g];
            let per_unit = unit.validated_dispatch / unit.existing_count as f64;
            let whole = ((remaining + MW_EPS) / per_unit).floor() as u32;
            let whole = whole.min(unit.existing_count);
            let mut mw = whole as f64 * per_unit;
            remaining -= mw;
            let mut scale = 1.0;
            if remaining > MW_EPS && whole < unit.existing_count {
                // Finish with one partial down-scaling; units stay online.
                let online_mw = (unit.existing_count - whole) as f64 * per_unit;
                scale = (online_mw - remaining) / online_mw;
                mw += remaining;
                remaining = 0.0;
            }
            if whole > 0 || scale < 1.0 {
                actions.push(UnitDisplacement {
                    unit_id: unit.id.clone(),
                    region: region.id.clone(),
                    units_removed: whole,
                    remaining_scale: scale,
                    mw_removed: mw,
                });
            }
        }
    }
    Ok(DisplacementPlan {
        level,
        target_mw: pv_mw_by_region.iter().sum(),
        pv_mw_by_region: pv_mw_by_region.to_vec(),
        actions,
    })
}

/// Builds the reduced-order dynamic case at `level` PV penetration.
///
/// `pv_capacity_mw` is the installed PV capacity per region (indexed like
/// `case.regions`), `pv_cf` the capacity factor of the studied operating
/// condition. The PV output target is `level * system load`, where system
/// load equals total validated dispatch.
pub fn build_dynamic_case(
    case: &PlanningCase,
    level: f64,
    pv_capacity_mw: &[f64],
    pv_cf: &[f64],
) -> Result<DynamicCase, ScenarioError> {
    if !(0.0..1.0).contains(&level) {
        return Err(ScenarioError::InvalidLevel(level));
    }
    if pv_capacity_mw.len() != case.regions.len() || pv_cf.len() != case.regions.len() {
        return Err(ScenarioError::RegionCount {
            want: case.regions.len(),
            got: pv_capacity_mw.len().min(pv_cf.len()),
        });
    }

    let system_load: f64 = case.units.iter().map(|u| u.validated_dispatch).sum();
    let target = level * system_load;

    let available: Vec<f64> = (0..case.regions.len())
        .map(|r| pv_cf[r] * pv_capacity_mw[r])
        .collect();
    let caps: Vec<f64> = case
        .regions
        .iter()
        .enumerate()
        .map(|(r, region)| available[r].min(displaceable_mw(case, &region.id)))
        .collect();
    let absorbable: f64 = caps.iter().sum();
    if target > absorbable + MW_EPS {
        return Err(ScenarioError::Shortfall {
            level,
            needed_mw: target,
            available_mw: absorbable,
        });
    }

    let pv_mw = allocate_capped(target, &available, &caps);
    let plan = build_displacement_plan(case, level, &pv_mw)?;

    let mut machines = Vec::with_capacity(case.regions.len());
    for (r, region) in case.regions.iter().enumerate() {
        let mut rated = 0.0;
        let mut h_weighted = 0.0;
        let mut droop_sum = 0.0; // sum of S_g / R_g
        let mut p_mech = 0.0;
        let mut fixed = 0.0;
        let mut load = 0.0;
        for unit in case.units_in(&region.id) {
            load += unit.validated_dispatch;
            if unit.kind == UnitKind::Pv {
                continue;
            }
            if !unit.kind.is_conventional() {
                fixed += unit.validated_dispatch;
                continue;
            }
            let action = plan.actions.iter().find(|a| a.unit_id == unit.id);
            let online = unit.existing_count
                - action.map(|a| a.units_removed).unwrap_or(0);
            let scale = action.map(|a| a.remaining_scale).unwrap_or(1.0);
            if online == 0 {
                continue;
            }
            let per_unit = if unit.existing_count > 0 {
                unit.validated_dispatch / unit.existing_count as f64
            } else {
                0.0
            };
            let s = unit.p_max * online as f64;
            rated += s;
            h_weighted += unit.inertia_h * s;
            if unit.governor_droop > 0.0 {
                droop_sum += s / unit.governor_droop;
            }
            p_mech += per_unit * online as f64 * scale;
        }
        machines.push(RegionMachine {
            region: region.id.clone(),
            rated_mva: rated,
            inertia_h: if rated > 0.0 { h_weighted / rated } else { 0.0 },
            droop: if droop_sum > 0.0 { rated / droop_sum } else { 0.0 },
            p_mech,
            p_max: rated,
            pv_mw: pv_mw[r],
            fixed_mw: fixed,
            load_mw: load,
        });
    }

    let ties = case
        .interfaces
        .iter()
        .map(|i| Tie {
            from: case.region_index(&i.from_region).expect("validated case"),
            to: case.region_index(&i.to_region).expect("validated case"),
            stiffness: i.sync_stiffness,
        })
        .collect();

    Ok(DynamicCase {
        level,
        f0_hz: NOMINAL_FREQUENCY_HZ,
        machines,
        ties,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{HourlySeries, PlanningCase, PlanningHorizon, Region, UnitGroup};

    fn unit(
        id: &str,
        kind: UnitKind,
        p_max: f64,
        count: u32,
        dispatch: f64,
        h: f64,
    ) -> UnitGroup {
        UnitGroup {
            id: id.into(),
            region: "a".into(),
            kind,
            p_max,
            existing_count: count,
            fixed_om: 0.0,
            var_om: 0.0,
            heat_rate: 0.0,
            fuel_price_by_year: vec![0.0],
            emission_coeff: 0.0,
            emission_price_by_year: vec![0.0],
            forced_outage_rate: 0.0,
            maintenance_outage_rate: 0.0,
            inertia_h: if kind == UnitKind::Pv { 0.0 } else { h },
            governor_droop: if kind.is_conventional() { 0.05 } else { 0.0 },
            validated_dispatch: dispatch,
        }
    }

    fn one_region_case(units: Vec<UnitGroup>) -> PlanningCase {
        let total: f64 = units.iter().map(|u| u.validated_dispatch).sum();
        PlanningCase {
            horizon: PlanningHorizon {
                n_years: 1,
                discount_rate: 0.05,
                hours_per_year: 4,
            },
            regions: vec![Region {
                id: "a".into(),
                name: "A".into(),
                pv_build_cost_by_year: vec![0.0],
                land_cost_by_year: vec![0.0],
                pv_build_limit_by_year: vec![0.0],
                voll: 9000.0,
                reserve_margin_by_year: vec![0.0],
                rps_by_year: vec![0.0],
                maintenance_factor: 0.0,
                validated_dispatch_total: total,
            }],
            units,
            interfaces: vec![],
            series: vec![HourlySeries {
                region: "a".into(),
                year: 1,
                load_mw: vec![total; 4],
                solar_cf: vec![0.5; 4],
            }],
        }
    }

    #[test]
    fn candidates_follow_technology_order() {
        let case = one_region_case(vec![
            unit("hydro1", UnitKind::Hydro, 150.0, 1, 100.0, 3.5),
            unit("coal1", UnitKind::Coal, 100.0, 3, 270.0, 4.5),
            unit("oil1", UnitKind::Oil, 80.0, 1, 60.0, 3.0),
            unit("wind1", UnitKind::Wind, 50.0, 2, 40.0, 0.0),
            unit("pv1", UnitKind::Pv, 10.0, 5, 30.0, 0.0),
        ]);
        let order: Vec<&str> = rank_displacement_candidates(&case, "a")
            .iter()
            .map(|&g| case.units[g].id.as_str())
            .collect();
        assert_eq!(order, vec!["oil1", "coal1", "hydro1"]);
    }

    #[test]
    fn greedy_whole_units_then_one_partial_scale() {
        // 350 MW to displace: all 3 coal units (270 MW at 90 MW each) come
        // offline, then gas (150 MW/unit) absorbs 80 MW by scaling both units
        // down to 220/300 of output; hydro is untouched.
        let case = one_region_case(vec![
            unit("coal1", UnitKind::Coal, 100.0, 3, 270.0, 4.5),
            unit("gas1", UnitKind::Gas, 200.0, 2, 300.0, 4.0),
            unit("hydro1", UnitKind::Hydro, 150.0, 1, 100.0, 3.5),
        ]);
        let plan = build_displacement_plan(&case, 0.5, &[350.0]).unwrap();
        assert_eq!(plan.actions.len(), 2);
        let coal = &plan.actions[0];
        assert_eq!(coal.unit_id, "coal1");
        assert_eq!(coal.units_removed, 3);
        assert_eq!(coal.remaining_scale, 1.0);
        assert!((coal.mw_removed - 270.0).abs() < 1e-9);
        let gas = &plan.actions[1];
        assert_eq!(gas.unit_id, "gas1");
        assert_eq!(gas.units_removed, 0);
        assert!((gas.remaining_scale - 220.0 / 300.0).abs() < 1e-12);
        assert!((gas.mw_removed - 80.0).abs() < 1e-9);
        let removed: f64 = plan.actions.iter().map(|a| a.mw_removed).sum();
        assert!((removed - 350.0).abs() < 1e-9);
    }

    #[test]
    fn partial_scaling_keeps_inertia_whole_removal_drops_it() {
        let case = one_region_case(vec![
            unit("coal1", UnitKind::Coal, 100.0, 3, 270.0, 4.5),
            unit("gas1", UnitKind::Gas, 200.0, 2, 300.0, 4.0),
        ]);
        // 80 MW: handled entirely by scaling coal, no inertia lost.
        let dc = build_dynamic_case(&case, 80.0 / 570.0, &[1000.0], &[0.5]).unwrap();
        assert!((dc.total_inertia_mws() - (4.5 * 300.0 + 4.0 * 400.0)).abs() < 1e-9);
        // 270 MW: all coal offline, its inertia gone.
        let dc = build_dynamic_case(&case, 270.0 / 570.0, &[1000.0], &[0.5]).unwrap();
        assert!((dc.total_inertia_mws() - 4.0 * 400.0).abs() < 1e-9);
    }

    #[test]
    fn inertia_never_increases_with_level() {
        let case = one_region_case(vec![
            unit("coal1", UnitKind::Coal, 100.0, 3, 270.0, 4.5),
            unit("gas1", UnitKind::Gas, 200.0, 2, 300.0, 4.0),
            unit("hydro1", UnitKind::Hydro, 150.0, 1, 100.0, 3.5),
        ]);
        let mut prev = f64::INFINITY;
        for level in [0.0, 0.1, 0.25, 0.45, 0.65, 0.80] {
            let dc = build_dynamic_case(&case, level, &[2000.0], &[0.5]).unwrap();
            let inertia = dc.total_inertia_mws();
            assert!(inertia <= prev + 1e-9, "level {level}: {inertia} > {prev}");
            prev = inertia;
        }
    }

    #[test]
    fn regional_balance_holds_after_displacement() {
        let case = one_region_case(vec![
            unit("coal1", UnitKind::Coal, 100.0, 3, 270.0, 4.5),
            unit("gas1", UnitKind::Gas, 200.0, 2, 300.0, 4.0),
            unit("wind1", UnitKind::Wind, 50.0, 2, 30.0, 0.0),
        ]);
        let dc = build_dynamic_case(&case, 0.4, &[2000.0], &[0.6]).unwrap();
        for m in &dc.machines {
            let imbalance = m.p_mech + m.pv_mw + m.fixed_mw - m.load_mw;
            assert!(imbalance.abs() < 1e-6, "imbalance {imbalance}");
        }
        assert!((dc.plan.target_mw - 0.4 * 600.0).abs() < 1e-9);
        // Wind stays online as a fixed injection.
        assert!((dc.machines[0].fixed_mw - 30.0).abs() < 1e-12);
    }

    #[test]
    fn unbuildable_level_is_a_shortfall() {
        let case = one_region_case(vec![unit(
            "coal1",
            UnitKind::Coal,
            100.0,
            3,
            270.0,
            4.5,
        )]);
        // 0.9 * 270 = 243 MW needed, but cf * capacity = 100 MW available.
        let err = build_dynamic_case(&case, 0.9, &[200.0], &[0.5]).unwrap_err();
        match err {
            ScenarioError::Shortfall {
                needed_mw,
                available_mw,
                ..
            } => {
                assert!((needed_mw - 243.0).abs() < 1e-9);
                assert!((available_mw - 100.0).abs() < 1e-9);
            }
            other => panic!("expected shortfall, got {other}"),
        }
    }

    #[test]
    fn allocation_respects_caps_and_redistributes() {
        let alloc = allocate_capped(100.0, &[80.0, 80.0], &[30.0, 100.0]);
        assert!((alloc[0] - 30.0).abs() < 1e-9);
        assert!((alloc[1] - 70.0).abs() < 1e-9);
        assert!((alloc.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }
}
