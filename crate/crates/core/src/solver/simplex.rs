//! Dense two-phase primal simplex with Dantzig pricing and a Bland-rule
//! fallback after prolonged degeneracy.
//!
//! General variable bounds are handled by shifting each variable to its
//! lower bound (splitting free variables) and adding one explicit row per
//! finite upper bound. Equality and >= rows get artificial variables driven
//! out in phase one.

use serde::{Deserialize, Serialize};

use super::{SolveError, SolverOptions};
use crate::lp::{LinearProgramSpec, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// One value per spec variable; empty unless optimal.
    pub values: Vec<f64>,
    /// One dual per spec constraint (not per bound); empty unless optimal.
    pub duals: Vec<f64>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            duals: Vec::new(),
        }
    }
}

const EPS: f64 = 1e-9;
const DEGENERATE_PIVOT_LIMIT: usize = 1000;

/// How a spec variable maps onto standard-form columns.
enum ColMap {
    /// x = offset + x'.
    Shifted { col: usize, offset: f64 },
    /// x = offset - x' (finite upper, infinite lower).
    Mirrored { col: usize, offset: f64 },
    /// x = x+ - x- (free).
    Split { pos: usize, neg: usize },
}

/// Solves the LP relaxation of `spec` (integrality flags ignored).
pub fn solve_lp(spec: &LinearProgramSpec, opts: &SolverOptions) -> Result<LpSolution, SolveError> {
    let lowers: Vec<f64> = spec.variables.iter().map(|v| v.lower).collect();
    let uppers: Vec<f64> = spec.variables.iter().map(|v| v.upper).collect();
    solve_lp_bounded(spec, &lowers, &uppers, opts)
}

/// Like [`solve_lp`] but with overridden variable bounds; used by
/// branch-and-bound nodes.
pub fn solve_lp_bounded(
    spec: &LinearProgramSpec,
    lowers: &[f64],
    uppers: &[f64],
    opts: &SolverOptions,
) -> Result<LpSolution, SolveError> {
    spec.check()?;
    let n = spec.n_vars();
    for j in 0..n {
        if lowers[j] > uppers[j] + EPS {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
    }

    // Map variables to shifted non-negative columns.
    let mut maps: Vec<ColMap> = Vec::with_capacity(n);
    let mut ncols = 0usize;
    for j in 0..n {
        if lowers[j].is_finite() {
            maps.push(ColMap::Shifted { col: ncols, offset: lowers[j] });
            ncols += 1;
        } else if uppers[j].is_finite() {
            maps.push(ColMap::Mirrored { col: ncols, offset: uppers[j] });
            ncols += 1;
        } else {
            maps.push(ColMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // Dense standard-form rows: spec constraints, then upper-bound rows.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &spec.constraints {
        let mut coeffs = vec![0.0; ncols];
        let mut rhs = c.rhs;
        for (j, a) in &c.row {
            match &maps[*j] {
                ColMap::Shifted { col, offset } => {
                    coeffs[*col] += a;
                    rhs -= a * offset;
                }
                ColMap::Mirrored { col, offset } => {
                    coeffs[*col] -= a;
                    rhs -= a * offset;
                }
                ColMap::Split { pos, neg } => {
                    coeffs[*pos] += a;
                    coeffs[*neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.sense, rhs));
    }
    for j in 0..n {
        if lowers[j].is_finite() && uppers[j].is_finite() {
            let span = uppers[j] - lowers[j];
            if let ColMap::Shifted { col, .. } = maps[j] {
                let mut coeffs = vec![0.0; ncols];
                coeffs[col] = 1.0;
                rows.push((coeffs, Sense::Le, span));
            }
        }
    }

    // Objective over standard columns.
    let mut cost = vec![0.0; ncols];
    let mut cost_offset = spec.objective_constant;
    for j in 0..n {
        let cj = spec.objective[j];
        if cj == 0.0 {
            continue;
        }
        match &maps[j] {
            ColMap::Shifted { col, offset } => {
                cost[*col] += cj;
                cost_offset += cj * offset;
            }
            ColMap::Mirrored { col, offset } => {
                cost[*col] -= cj;
                cost_offset += cj * offset;
            }
            ColMap::Split { pos, neg } => {
                cost[*pos] += cj;
                cost[*neg] -= cj;
            }
        }
    }

    let m = rows.len();
    // Flip rows to non-negative rhs, remembering dual sign corrections.
    let mut flipped = vec![false; m];
    for (i, row) in rows.iter_mut().enumerate() {
        if row.2 < 0.0 {
            for v in row.0.iter_mut() {
                *v = -*v;
            }
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            flipped[i] = true;
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let n_slack = rows
        .iter()
        .filter(|r| matches!(r.1, Sense::Le | Sense::Ge))
        .count();
    let n_art = rows
        .iter()
        .filter(|r| matches!(r.1, Sense::Ge | Sense::Eq))
        .count();
    let total = ncols + n_slack + n_art;

    let mut tableau = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    // marker column per row for dual extraction: (column, sign).
    let mut dual_col = vec![(0usize, 1.0); m];
    let mut s = ncols;
    let mut a = ncols + n_slack;
    for (i, (coeffs, sense, rhs)) in rows.iter().enumerate() {
        tableau[i][..ncols].copy_from_slice(coeffs);
        tableau[i][total] = *rhs;
        match sense {
            Sense::Le => {
                tableau[i][s] = 1.0;
                basis[i] = s;
                dual_col[i] = (s, -1.0);
                s += 1;
            }
            Sense::Ge => {
                tableau[i][s] = -1.0;
                dual_col[i] = (s, 1.0);
                s += 1;
                tableau[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            Sense::Eq => {
                tableau[i][a] = 1.0;
                basis[i] = a;
                dual_col[i] = (a, -1.0);
                a += 1;
            }
        }
    }
    let art_start = ncols + n_slack;

    let mut iterations = 0usize;

    // Phase one: minimize the artificial sum.
    if n_art > 0 {
        let mut obj = vec![0.0; total + 1];
        // Phase-1 cost: 1 on every artificial column.
        for j in art_start..total {
            obj[j] = 1.0;
        }
        for i in 0..m {
            if basis[i] >= art_start {
                for j in 0..=total {
                    obj[j] -= tableau[i][j];
                }
            }
        }
        run_simplex(
            &mut tableau,
            &mut basis,
            &mut obj,
            total,
            None,
            opts,
            &mut iterations,
        )?;
        let phase1 = -obj[total];
        if phase1 > 1e-7 {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        // Drive remaining artificials out of the basis.
        for i in 0..m {
            if basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tableau[i][j].abs() > 1e-7) {
                    pivot(&mut tableau, &mut basis, None, i, j, total);
                }
                // A fully zero row is redundant; its artificial stays basic
                // at zero and never re-enters (artificials are banned below).
            }
        }
    }

    // Phase two: minimize the true cost.
    let mut obj = vec![0.0; total + 1];
    obj[..ncols].copy_from_slice(&cost);
    for i in 0..m {
        let cb = if basis[i] < ncols { cost[basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..=total {
                obj[j] -= cb * tableau[i][j];
            }
        }
    }
    let status = run_simplex(
        &mut tableau,
        &mut basis,
        &mut obj,
        total,
        Some(art_start),
        opts,
        &mut iterations,
    )?;
    if status == LpStatus::Unbounded {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
    }

    // Recover the standard-form point and map back to spec variables.
    let mut xstd = vec![0.0; total];
    for i in 0..m {
        xstd[basis[i]] = tableau[i][total];
    }
    let mut values = vec![0.0; n];
    for j in 0..n {
        values[j] = match &maps[j] {
            ColMap::Shifted { col, offset } => offset + xstd[*col],
            ColMap::Mirrored { col, offset } => offset - xstd[*col],
            ColMap::Split { pos, neg } => xstd[*pos] - xstd[*neg],
        };
    }

    let mut duals = vec![0.0; spec.constraints.len()];
    for i in 0..spec.constraints.len() {
        let (col, sign) = dual_col[i];
        let mut y = sign * obj[col];
        if flipped[i] {
            y = -y;
        }
        duals[i] = y;
    }

    let _ = cost_offset; // objective recomputed from spec for exactness
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: spec.objective_value(&values),
        values,
        duals,
    })
}

/// Pivots until optimal or unbounded. `banned_from` excludes artificial
/// columns from entering in phase two.
fn run_simplex(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: &mut Vec<f64>,
    total: usize,
    banned_from: Option<usize>,
    opts: &SolverOptions,
    iterations: &mut usize,
) -> Result<LpStatus, SolveError> {
    let m = tableau.len();
    let limit = banned_from.unwrap_or(total);
    let mut degenerate = 0usize;
    loop {
        *iterations += 1;
        if *iterations > opts.max_iterations {
            return Err(SolveError::IterationLimit(opts.max_iterations));
        }
        let bland = degenerate > DEGENERATE_PIVOT_LIMIT;

        // Entering column: Dantzig, or Bland once degeneracy persists.
        let mut entering = None;
        if bland {
            for j in 0..limit {
                if obj[j] < -EPS {
                    entering = Some(j);
                    break;
                }
            }
        } else {
            let mut best = -EPS;
            for j in 0..limit {
                if obj[j] < best {
                    best = obj[j];
                    entering = Some(j);
                }
            }
        }
        let Some(col) = entering else {
            return Ok(LpStatus::Optimal);
        };

        // Ratio test; ties to the lowest basis variable (Bland-compatible).
        let mut leaving = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            let aij = tableau[i][col];
            if aij > EPS {
                let ratio = tableau[i][total] / aij;
                let better = ratio < best_ratio - EPS
                    || (ratio < best_ratio + EPS
                        && leaving.map_or(true, |l: usize| basis[i] < basis[l]));
                if better {
                    best_ratio = ratio;
                    leaving = Some(i);
                }
            }
        }
        let Some(row) = leaving else {
            return Ok(LpStatus::Unbounded);
        };
        if best_ratio < EPS {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        pivot(tableau, basis, Some(obj), row, col, total);
    }
}

fn pivot(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: Option<&mut Vec<f64>>,
    row: usize,
    col: usize,
    total: usize,
) {
    let m = tableau.len();
    let p = tableau[row][col];
    for j in 0..=total {
        tableau[row][j] /= p;
    }
    for i in 0..m {
        if i != row {
            let f = tableau[i][col];
            if f != 0.0 {
                for j in 0..=total {
                    tableau[i][j] -= f * tableau[row][j];
                }
                tableau[i][col] = 0.0;
            }
        }
    }
    if let Some(obj) = obj {
        let f = obj[col];
        if f != 0.0 {
            for j in 0..=total {
                obj[j] -= f * tableau[row][j];
            }
            obj[col] = 0.0;
        }
    }
    basis[row] = col;
}
