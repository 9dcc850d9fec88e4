//! Reduced-order frequency dynamics and response metrics.
//!
//! Each region is one aggregate machine with three states: rotor angle,
//! frequency deviation, and mechanical power. Regions couple through
//! linearized synchronizing ties. Integration is classic fixed-step RK4.
//!
//! Per region r:
//!
//! ```text
//! d delta_r / dt = 2 pi df_r
//! (2 H_r S_r / f0) d df_r / dt =
//!     P_m,r + P_pv,r + P_fixed,r - P_load,r - P_event,r
//!     - sum_j K_rj (delta_r - delta_j) - D S_r df_r / f0
//! T_g d P_m,r / dt = P_set,r - (S_r / (R_r f0)) df_r - P_m,r
//! ```
//!
//! with `P_m` clamped to `[0, p_max]` (no spinning reserve above the
//! machine base). A contingency is a loss of `mw` injection in one region at
//! `time`; spinning inertia is unchanged, which models the trip of a large
//! infeed rather than a synchronous machine.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bundle::DynamicsConfig;
use crate::scenario::DynamicCase;

#[derive(Debug, thiserror::Error)]
pub enum DynamicsError {
    #[error("region {region} has no rotating inertia (H * S = {hs}); cannot integrate")]
    NoInertia { region: String, hs: f64 },
    #[error("time step must be > 0, got {0}")]
    BadTimestep(f64),
    #[error("horizon must be > 0, got {0}")]
    BadHorizon(f64),
    #[error("disturbance region index {0} out of range")]
    BadRegion(usize),
    #[error("disturbance time {time} outside horizon {horizon}")]
    BadEventTime { time: f64, horizon: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Loss of `mw` of injection in `region` at `time` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disturbance {
    pub region: usize,
    pub mw: f64,
    pub time: f64,
}

/// Sampled frequency response of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTrace {
    pub region_ids: Vec<String>,
    /// Sample instants (s), uniform spacing.
    pub t: Vec<f64>,
    /// System frequency (Hz): inertia-weighted or plain mean per config.
    pub f_avg: Vec<f64>,
    /// `f_by_region[r][i]` is region r's frequency at `t[i]` (Hz).
    pub f_by_region: Vec<Vec<f64>>,
    /// When the disturbance was applied; 0 for flat runs.
    pub event_time: f64,
}

impl FrequencyTrace {
    pub fn dt(&self) -> f64 {
        if self.t.len() > 1 { self.t[1] - self.t[0] } else { 0.0 }
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DynamicsError> {
        let mut out = String::new();
        out.push_str("t,f_avg");
        for rid in &self.region_ids {
            out.push_str(&format!(",f_{rid}"));
        }
        out.push('\n');
        for i in 0..self.t.len() {
            out.push_str(&format!("{},{}", self.t[i], self.f_avg[i]));
            for r in 0..self.region_ids.len() {
                out.push_str(&format!(",{}", self.f_by_region[r][i]));
            }
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Outcome of a no-disturbance equilibrium check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatRunReport {
    /// Worst |f - f0| over all regions and samples (Hz).
    pub max_deviation_hz: f64,
    pub ripple_tol_hz: f64,
    pub pass: bool,
}

struct Model<'a> {
    case: &'a DynamicCase,
    cfg: &'a DynamicsConfig,
    /// 2 H_r S_r / f0 per region.
    m: Vec<f64>,
    event: Option<Disturbance>,
}

impl Model<'_> {
    /// State layout: [delta_0.., df_0.., pm_0..]. `event_active` is decided
    /// per whole step so the trip lands exactly on a step boundary and never
    /// bleeds into the intermediate stages of the preceding step.
    fn derivatives(&self, event_active: bool, x: &[f64], dx: &mut [f64]) {
        let n = self.case.machines.len();
        let (delta, rest) = x.split_at(n);
        let (df, pm) = rest.split_at(n);
        let f0 = self.case.f0_hz;

        let mut tie_mw = vec![0.0; n];
        for tie in &self.case.ties {
            let p = tie.stiffness * (delta[tie.from] - delta[tie.to]);
            tie_mw[tie.from] += p;
            tie_mw[tie.to] -= p;
        }

        for (r, mach) in self.case.machines.iter().enumerate() {
            let mut pv = mach.pv_mw;
            if self.cfg.pv_droop > 0.0 && mach.pv_mw > 0.0 {
                // PV frequency response: curtailment-only droop around the
                // operating point (no headroom above it).
                pv = (mach.pv_mw - mach.pv_mw * df[r] / (self.cfg.pv_droop * f0))
                    .clamp(0.0, mach.pv_mw);
            }
            let mut p_event = 0.0;
            if let Some(e) = self.event {
                if event_active && e.region == r {
                    p_event = e.mw;
                }
            }
            let accel = pm[r] + pv + mach.fixed_mw - mach.load_mw - p_event - tie_mw[r]
                - self.cfg.damping * mach.rated_mva * df[r] / f0;

            dx[r] = 2.0 * std::f64::consts::PI * df[r];
            dx[n + r] = accel / self.m[r];
            dx[2 * n + r] = if mach.droop > 0.0 && self.cfg.governor_tg > 0.0 {
                let db = self.cfg.governor_deadband_hz;
                let sensed = if df[r].abs() <= db {
                    0.0
                } else {
                    df[r] - db * df[r].signum()
                };
                let target = mach.p_mech - mach.rated_mva * sensed / (mach.droop * f0);
                (target.clamp(0.0, mach.p_max) - pm[r]) / self.cfg.governor_tg
            } else {
                0.0
            };
        }
    }

    fn rk4_step(&self, event_active: bool, x: &mut [f64], dt: f64) {
        let n = x.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.derivatives(event_active, x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        self.derivatives(event_active, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        self.derivatives(event_active, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        self.derivatives(event_active, &tmp, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        // Keep mechanical power inside its physical range between steps.
        let nm = self.case.machines.len();
        for (r, mach) in self.case.machines.iter().enumerate() {
            x[2 * nm + r] = x[2 * nm + r].clamp(0.0, mach.p_max);
        }
    }
}

fn simulate(
    case: &DynamicCase,
    cfg: &DynamicsConfig,
    horizon: f64,
    event: Option<Disturbance>,
) -> Result<FrequencyTrace, DynamicsError> {
    if !(cfg.dt > 0.0) {
        return Err(DynamicsError::BadTimestep(cfg.dt));
    }
    if !(horizon > 0.0) {
        return Err(DynamicsError::BadHorizon(horizon));
    }
    if let Some(e) = event {
        if e.region >= case.machines.len() {
            return Err(DynamicsError::BadRegion(e.region));
        }
        if !(0.0..horizon).contains(&e.time) {
            return Err(DynamicsError::BadEventTime { time: e.time, horizon });
        }
    }
    let f0 = case.f0_hz;
    let mut m = Vec::with_capacity(case.machines.len());
    for mach in &case.machines {
        let hs = mach.inertia_h * mach.rated_mva;
        if !(hs > 0.0) {
            return Err(DynamicsError::NoInertia {
                region: mach.region.clone(),
                hs,
            });
        }
        m.push(2.0 * hs / f0);
    }
    let weights: Vec<f64> = if cfg.inertia_weighted_average {
        m.clone()
    } else {
        vec![1.0; m.len()]
    };
    let wsum: f64 = weights.iter().sum();

    let n = case.machines.len();
    // Start at the operating point: zero angle spread, nominal frequency.
    let mut x = vec![0.0; 3 * n];
    for (r, mach) in case.machines.iter().enumerate() {
        x[2 * n + r] = mach.p_mech;
    }

    let model = Model { case, cfg, m, event };
    let steps = (horizon / cfg.dt).round() as usize;
    let mut t_out = Vec::with_capacity(steps + 1);
    let mut f_avg = Vec::with_capacity(steps + 1);
    let mut f_by_region = vec![Vec::with_capacity(steps + 1); n];
    let mut record = |t: f64, x: &[f64]| {
        t_out.push(t);
        let mut acc = 0.0;
        for r in 0..n {
            let f = f0 + x[n + r];
            f_by_region[r].push(f);
            acc += weights[r] * f;
        }
        f_avg.push(acc / wsum);
    };
    record(0.0, &x);
    // The trip takes effect at the step boundary nearest the event time.
    let event_step = event.map(|e| (e.time / cfg.dt).round() as usize);
    for i in 0..steps {
        let active = event_step.is_some_and(|k| i >= k);
        model.rk4_step(active, &mut x, cfg.dt);
        record((i + 1) as f64 * cfg.dt, &x);
    }

    Ok(FrequencyTrace {
        region_ids: case.machines.iter().map(|m| m.region.clone()).collect(),
        t: t_out,
        f_avg,
        f_by_region,
        event_time: event.map(|e| e.time).unwrap_or(0.0),
    })
}

/// Runs the case without any disturbance and checks that it holds nominal
/// frequency: the cheapest end-to-end sanity check of a constructed case.
pub fn flat_run(
    case: &DynamicCase,
    cfg: &DynamicsConfig,
) -> Result<(FlatRunReport, FrequencyTrace), DynamicsError> {
    let trace = simulate(case, cfg, cfg.flat_horizon, None)?;
    let max_deviation_hz = trace
        .f_by_region
        .iter()
        .flatten()
        .map(|f| (f - case.f0_hz).abs())
        .fold(0.0, f64::max);
    Ok((
        FlatRunReport {
            max_deviation_hz,
            ripple_tol_hz: cfg.ripple_tol_hz,
            pass: max_deviation_hz <= cfg.ripple_tol_hz,
        },
        trace,
    ))
}

/// Simulates the loss of `event.mw` of injection in one region.
pub fn simulate_contingency(
    case: &DynamicCase,
    cfg: &DynamicsConfig,
    event: Disturbance,
) -> Result<FrequencyTrace, DynamicsError> {
    simulate(case, cfg, cfg.contingency_horizon, Some(event))
}

// ---------------------------------------------------------------------------
// Frequency-response metrics
// ---------------------------------------------------------------------------

/// The four standard numbers summarizing one frequency excursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyMetrics {
    /// Lowest post-event system frequency (Hz).
    pub nadir_hz: f64,
    /// Signed rate of change of frequency with the largest magnitude,
    /// least-squares slope over a sliding window (mHz/s).
    pub rocof_mhz_per_s: f64,
    /// First time after which the frequency stays inside the settling band,
    /// measured from the event (s).
    pub settling_time_s: f64,
    /// Mean frequency over the final two seconds (Hz).
    pub settling_frequency_hz: f64,
}

/// Acceptance tolerances for metric pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTolerances {
    pub nadir_hz: f64,
    pub rocof_mhz_per_s: f64,
    pub settling_time_s: f64,
    pub settling_frequency_hz: f64,
}

impl Default for MetricTolerances {
    fn default() -> Self {
        Self {
            nadir_hz: 0.005,
            rocof_mhz_per_s: 0.5,
            settling_time_s: 2.0,
            settling_frequency_hz: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub nadir_delta_hz: f64,
    pub rocof_delta_mhz_per_s: f64,
    pub settling_time_delta_s: f64,
    pub settling_frequency_delta_hz: f64,
    pub pass: bool,
}

pub fn compare_metrics(
    a: &FrequencyMetrics,
    b: &FrequencyMetrics,
    tol: &MetricTolerances,
) -> MetricComparison {
    let c = MetricComparison {
        nadir_delta_hz: (a.nadir_hz - b.nadir_hz).abs(),
        rocof_delta_mhz_per_s: (a.rocof_mhz_per_s - b.rocof_mhz_per_s).abs(),
        settling_time_delta_s: (a.settling_time_s - b.settling_time_s).abs(),
        settling_frequency_delta_hz: (a.settling_frequency_hz - b.settling_frequency_hz).abs(),
        pass: false,
    };
    MetricComparison {
        pass: c.nadir_delta_hz <= tol.nadir_hz
            && c.rocof_delta_mhz_per_s <= tol.rocof_mhz_per_s
            && c.settling_time_delta_s <= tol.settling_time_s
            && c.settling_frequency_delta_hz <= tol.settling_frequency_hz,
        ..c
    }
}

/// Least-squares slope of `f` against `t` (both full slices).
fn ls_slope(t: &[f64], f: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let fm = f.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (ti, fi) in t.iter().zip(f) {
        num += (ti - tm) * (fi - fm);
        den += (ti - tm) * (ti - tm);
    }
    if den > 0.0 { num / den } else { 0.0 }
}

/// Extracts the standard response metrics from a contingency trace.
pub fn compute_metrics(trace: &FrequencyTrace, cfg: &DynamicsConfig) -> FrequencyMetrics {
    let t = &trace.t;
    let f = &trace.f_avg;
    let event = trace.event_time;
    let n = t.len();
    let first_post = t.partition_point(|&ti| ti < event);

    let nadir_hz = f[first_post..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    // Max-magnitude sliding-window slope, windows entirely after the event.
    let dt = trace.dt();
    let w = (cfg.rocof_window_s / dt).round().max(1.0) as usize;
    let mut rocof = 0.0f64;
    let mut i = first_post;
    while i + w < n {
        let s = ls_slope(&t[i..=i + w], &f[i..=i + w]);
        if s.abs() > rocof.abs() {
            rocof = s;
        }
        i += 1;
    }

    // Settling frequency: mean over the final 2 seconds.
    let tail = ((2.0 / dt).round() as usize).min(n - 1).max(1);
    let settling_frequency_hz = f[n - tail..].iter().sum::<f64>() / tail as f64;

    // Settling time: entry into the band around the settled value, for good.
    let band = cfg.settle_band_hz;
    let mut settle_idx = first_post;
    for i in (first_post..n).rev() {
        if (f[i] - settling_frequency_hz).abs() > band {
            settle_idx = (i + 1).min(n - 1);
            break;
        }
    }
    let settling_time_s = (t[settle_idx] - event).max(0.0);

    FrequencyMetrics {
        nadir_hz,
        rocof_mhz_per_s: rocof * 1000.0,
        settling_time_s,
        settling_frequency_hz,
    }
}
