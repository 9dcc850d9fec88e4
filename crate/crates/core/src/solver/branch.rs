//! Best-bound branch-and-bound over the integer-flagged variables of a
//! [`LinearProgramSpec`]. Branching is deterministic: most-fractional
//! variable with ties to the lowest index, best-bound node order with
//! FIFO tie-breaking.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::simplex::{solve_lp_bounded, LpSolution, LpStatus};
use super::{SolveError, SolverOptions};
use crate::lp::LinearProgramSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    GapLimit,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Best integral solution found, if any. Integer variables are snapped
    /// to exact integers.
    pub incumbent: Option<LpSolution>,
    /// Best proven lower bound on the optimum (minimization).
    pub bound: f64,
    /// (incumbent - bound) / max(1, |incumbent|); non-negative.
    pub gap: f64,
    pub nodes_explored: usize,
    /// Line-oriented diagnostic log, populated when `opts.verbose` is set.
    pub node_log: Vec<String>,
}

struct Node {
    bound: f64,
    seq: u64,
    depth: usize,
    lowers: Vec<f64>,
    uppers: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; invert so the lowest bound pops first,
    // ties FIFO by sequence number.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.seq.cmp(&self.seq))
    }
}

/// Most fractional integer variable (fraction closest to 1/2), ties to the
/// lowest index. `None` when all integer variables are integral within tol.
fn most_fractional(spec: &LinearProgramSpec, values: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, v) in spec.variables.iter().enumerate() {
        if !v.integer {
            continue;
        }
        let frac = values[j] - values[j].floor();
        let dist = frac.min(1.0 - frac);
        if dist <= tol {
            continue;
        }
        let score = (frac - 0.5).abs();
        match best {
            Some((_, s)) if score >= s => {}
            _ => best = Some((j, score)),
        }
    }
    best.map(|(j, _)| j)
}

fn snap_integers(spec: &LinearProgramSpec, sol: &mut LpSolution) {
    for (j, v) in spec.variables.iter().enumerate() {
        if v.integer {
            sol.values[j] = sol.values[j].round();
        }
    }
    sol.objective = spec.objective_value(&sol.values);
}

/// Solves the mixed-integer program. With no integer flags this reduces to a
/// single LP solve. On `Optimal` the incumbent objective is within
/// `opts.abs_gap` of the true integer optimum.
pub fn solve_milp(
    spec: &LinearProgramSpec,
    opts: &SolverOptions,
) -> Result<MilpSolution, SolveError> {
    spec.check()?;
    let start = Instant::now();
    let tol = opts.integrality_tol;
    let root_lowers: Vec<f64> = spec.variables.iter().map(|v| v.lower).collect();
    let root_uppers: Vec<f64> = spec.variables.iter().map(|v| v.upper).collect();

    let mut log: Vec<String> = Vec::new();
    let mut nodes_explored = 0usize;
    let mut incumbent: Option<LpSolution> = None;
    let mut seq = 0u64;

    let root = solve_lp_bounded(spec, &root_lowers, &root_uppers, opts)?;
    match root.status {
        LpStatus::Infeasible => {
            return Ok(MilpSolution {
                status: MilpStatus::Infeasible,
                incumbent: None,
                bound: f64::INFINITY,
                gap: 0.0,
                nodes_explored: 1,
                node_log: log,
            })
        }
        LpStatus::Unbounded => return Err(SolveError::UnboundedRelaxation),
        LpStatus::Optimal => {}
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: root.objective,
        seq,
        depth: 0,
        lowers: root_lowers,
        uppers: root_uppers,
    });

    let mut status = MilpStatus::Optimal;
    let mut global_bound = root.objective;

    while let Some(node) = heap.pop() {
        global_bound = node.bound;
        if let Some(inc) = &incumbent {
            let abs_gap = inc.objective - global_bound;
            let rel = abs_gap / inc.objective.abs().max(1.0);
            if abs_gap <= opts.abs_gap || (opts.rel_gap > 0.0 && rel <= opts.rel_gap) {
                break;
            }
        }
        if nodes_explored >= opts.max_nodes {
            status = MilpStatus::NodeLimit;
            break;
        }
        if opts.time_limit_seconds > 0.0
            && start.elapsed().as_secs_f64() > opts.time_limit_seconds
        {
            status = MilpStatus::GapLimit;
            break;
        }

        nodes_explored += 1;
        let relax = solve_lp_bounded(spec, &node.lowers, &node.uppers, opts)?;
        match relax.status {
            LpStatus::Infeasible => {
                if opts.verbose {
                    log.push(format!(
                        "node {} depth {} pruned infeasible",
                        nodes_explored, node.depth
                    ));
                }
                continue;
            }
            LpStatus::Unbounded => return Err(SolveError::UnboundedRelaxation),
            LpStatus::Optimal => {}
        }
        if let Some(inc) = &incumbent {
            if relax.objective >= inc.objective - opts.abs_gap {
                if opts.verbose {
                    log.push(format!(
                        "node {} depth {} bound {:.6} pruned by incumbent {:.6}",
                        nodes_explored, node.depth, relax.objective, inc.objective
                    ));
                }
                continue;
            }
        }

        match most_fractional(spec, &relax.values, tol) {
            None => {
                let mut candidate = relax;
                snap_integers(spec, &mut candidate);
                let better = incumbent
                    .as_ref()
                    .map_or(true, |inc| candidate.objective < inc.objective);
                if opts.verbose {
                    log.push(format!(
                        "node {} depth {} integral objective {:.6}{}",
                        nodes_explored,
                        node.depth,
                        candidate.objective,
                        if better { " (new incumbent)" } else { "" }
                    ));
                }
                if better {
                    incumbent = Some(candidate);
                }
            }
            Some(j) => {
                let value = relax.values[j];
                if opts.verbose {
                    log.push(format!(
                        "node {} depth {} bound {:.6} branch x{} = {:.4}",
                        nodes_explored, node.depth, relax.objective, j, value
                    ));
                }
                let mut down = Node {
                    bound: relax.objective,
                    seq: seq + 1,
                    depth: node.depth + 1,
                    lowers: node.lowers.clone(),
                    uppers: node.uppers.clone(),
                };
                down.uppers[j] = value.floor();
                let mut up = Node {
                    bound: relax.objective,
                    seq: seq + 2,
                    depth: node.depth + 1,
                    lowers: node.lowers,
                    uppers: node.uppers,
                };
                up.lowers[j] = value.ceil();
                seq += 2;
                heap.push(down);
                heap.push(up);
            }
        }
    }

    if status == MilpStatus::Optimal && heap.is_empty() {
        // Tree exhausted: the incumbent (or infeasibility) is proven.
        if let Some(inc) = &incumbent {
            global_bound = inc.objective;
        }
    }

    match incumbent {
        None => Ok(MilpSolution {
            status: if status == MilpStatus::Optimal {
                MilpStatus::Infeasible
            } else {
                status
            },
            incumbent: None,
            bound: global_bound,
            gap: 0.0,
            nodes_explored,
            node_log: log,
        }),
        Some(inc) => {
            let gap = ((inc.objective - global_bound) / inc.objective.abs().max(1.0)).max(0.0);
            Ok(MilpSolution {
                status,
                incumbent: Some(inc),
                bound: global_bound,
                gap,
                nodes_explored,
                node_log: log,
            })
        }
    }
}
