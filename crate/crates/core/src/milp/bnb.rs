use std::time::Instant;

use super::simplex::{DualSimplex, LpOutcome};
use super::{check_assignment, MilpBackend, MilpModel, SolveError, SolveLimits, SolveStatus, SolverResult, FEAS_TOL};

/// Depth-first branch-and-bound over dual-simplex LP relaxations.
///
/// Branches on the most fractional integer variable (ties: lowest index) and
/// explores the child on the rounding side first. The search is fully
/// deterministic; there are no cuts, presolve or primal heuristics.
#[derive(Clone, Debug, Default)]
pub struct BranchAndBound {
    /// Optional cap on explored nodes; hitting it reports `TimeLimit`.
    pub node_limit: Option<u64>,
}

/// The relaxation keeps a dense tableau; beyond this many entries use an
/// external backend instead.
pub const MAX_TABLEAU_ENTRIES: usize = 40_000_000;

struct Node {
    /// Bound changes relative to the root, applied in order.
    changes: Vec<(usize, f64, f64)>,
    /// LP bound of the parent.
    bound: f64,
}

/// Spacing of attainable objective values, when the objective is provably
/// restricted to a lattice `k·step` (integer variables with dyadic coefficients).
fn objective_lattice(model: &MilpModel) -> Option<f64> {
    let costs = model.cost_vector();
    let mut step = None;
    'k: for k in 0..=8 {
        let scale = f64::from(1u32 << k);
        for (v, &c) in model.variables.iter().zip(&costs) {
            if c == 0.0 {
                continue;
            }
            if !v.integer {
                return None;
            }
            let s = c * scale;
            if (s - s.round()).abs() > 1e-9 {
                continue 'k;
            }
        }
        step = Some(1.0 / scale);
        break;
    }
    step
}

impl BranchAndBound {
    fn prunable(bound: f64, incumbent: Option<f64>, lattice: Option<f64>, gap: f64) -> bool {
        let Some(inc) = incumbent else {
            return false;
        };
        let effective = match lattice {
            Some(step) => ((bound - 1e-6) / step).ceil() * step,
            None => bound,
        };
        effective >= inc - 1e-9 * inc.abs().max(1.0) - gap * inc.abs()
    }
}

impl MilpBackend for BranchAndBound {
    fn name(&self) -> &str {
        "builtin"
    }

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Result<SolverResult, SolveError> {
        model.validate()?;
        let (rows, cols) = (model.num_constraints(), model.num_vars() + model.num_constraints());
        if rows.saturating_mul(cols) > MAX_TABLEAU_ENTRIES {
            return Err(SolveError::TooLarge { rows, cols });
        }
        let start = Instant::now();
        let deadline = limits.time.map(|t| start + t);
        let n = model.num_vars();

        let mut root_lo: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
        let mut root_up: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
        for (j, v) in model.variables.iter().enumerate() {
            if v.integer {
                root_lo[j] = (root_lo[j] - FEAS_TOL).ceil();
                root_up[j] = (root_up[j] + FEAS_TOL).floor();
            }
            if root_lo[j] > root_up[j] {
                return Ok(SolverResult {
                    status: SolveStatus::Infeasible,
                    incumbent: None,
                    objective: None,
                    bound: f64::INFINITY,
                    wall_time: start.elapsed(),
                    nodes: 0,
                });
            }
        }
        let integer: Vec<usize> = (0..n).filter(|&j| model.variables[j].integer).collect();
        let lattice = objective_lattice(model);

        let mut lp = DualSimplex::new(model);
        let mut stack = vec![Node { changes: Vec::new(), bound: f64::NEG_INFINITY }];
        let mut incumbent: Option<(Vec<f64>, f64)> = None;
        let mut nodes = 0u64;
        let mut unresolved = false;
        let mut interrupted = false;
        let mut gap_stop = false;
        let mut lo = root_lo.clone();
        let mut up = root_up.clone();

        while let Some(node) = stack.pop() {
            let inc_obj = incumbent.as_ref().map(|i| i.1);
            if Self::prunable(node.bound, inc_obj, lattice, limits.gap) {
                continue;
            }
            let out_of_time = deadline.is_some_and(|d| Instant::now() >= d);
            let out_of_nodes = self.node_limit.is_some_and(|l| nodes >= l);
            if out_of_time || out_of_nodes {
                stack.push(node);
                interrupted = true;
                break;
            }
            nodes += 1;

            lo.copy_from_slice(&root_lo);
            up.copy_from_slice(&root_up);
            for &(j, l, u) in &node.changes {
                lo[j] = l;
                up[j] = u;
            }
            lp.set_bounds(&lo, &up);
            let objective = match lp.solve(deadline) {
                LpOutcome::Optimal(obj) => obj,
                LpOutcome::Infeasible => continue,
                LpOutcome::Unbounded => {
                    return Ok(SolverResult {
                        status: SolveStatus::Unbounded,
                        incumbent: None,
                        objective: None,
                        bound: f64::NEG_INFINITY,
                        wall_time: start.elapsed(),
                        nodes,
                    });
                }
                LpOutcome::TimedOut => {
                    stack.push(node);
                    interrupted = true;
                    break;
                }
                LpOutcome::IterationLimit => {
                    unresolved = true;
                    continue;
                }
            };
            if Self::prunable(objective, inc_obj, lattice, limits.gap) {
                continue;
            }

            let x = lp.values();
            let mut branch = None;
            let mut best_frac = FEAS_TOL;
            for &j in &integer {
                let f = x[j] - x[j].floor();
                let frac = f.min(1.0 - f);
                if frac > best_frac {
                    best_frac = frac;
                    branch = Some(j);
                }
            }

            match branch {
                None => {
                    let mut cand = x.to_vec();
                    for &j in &integer {
                        cand[j] = cand[j].round();
                    }
                    for j in 0..n {
                        cand[j] = cand[j].clamp(lo[j], up[j]);
                    }
                    if !check_assignment(model, &cand) {
                        // Accumulated round-off; rebuild the factorisation and retry the node.
                        lp.refactor();
                        let retried = match lp.solve(deadline) {
                            LpOutcome::Optimal(_) => {
                                let mut c2 = lp.values().to_vec();
                                for &j in &integer {
                                    c2[j] = c2[j].round();
                                }
                                for j in 0..n {
                                    c2[j] = c2[j].clamp(lo[j], up[j]);
                                }
                                check_assignment(model, &c2).then_some(c2)
                            }
                            _ => None,
                        };
                        match retried {
                            Some(c2) => cand = c2,
                            None => {
                                unresolved = true;
                                continue;
                            }
                        }
                    }
                    let obj = model.objective_value(&cand);
                    if incumbent.as_ref().map_or(true, |(_, best)| obj < *best - 1e-12) {
                        incumbent = Some((cand, obj));
                    }
                    if limits.gap > 0.0 {
                        let open = stack.iter().map(|nd| nd.bound).fold(f64::INFINITY, f64::min);
                        let best = incumbent.as_ref().map(|i| i.1).unwrap_or(f64::INFINITY);
                        if open.is_finite() && best - open <= limits.gap * best.abs() {
                            gap_stop = !stack.is_empty();
                            break;
                        }
                    }
                }
                Some(j) => {
                    let v = x[j];
                    let mut down = node.changes.clone();
                    down.push((j, lo[j], v.floor()));
                    let mut upc = node.changes;
                    upc.push((j, v.ceil(), up[j]));
                    let down = Node { changes: down, bound: objective };
                    let upn = Node { changes: upc, bound: objective };
                    if v - v.floor() >= 0.5 {
                        stack.push(down);
                        stack.push(upn);
                    } else {
                        stack.push(upn);
                        stack.push(down);
                    }
                }
            }
        }

        let wall_time = start.elapsed();
        let inc_obj = incumbent.as_ref().map(|i| i.1);
        let open_bound = stack.iter().map(|nd| nd.bound).fold(f64::INFINITY, f64::min);
        let (status, bound) = if interrupted || gap_stop {
            let b = match inc_obj {
                Some(o) => open_bound.min(o),
                None => open_bound,
            };
            let status = if gap_stop { SolveStatus::Feasible } else { SolveStatus::TimeLimit };
            (status, b)
        } else if unresolved {
            // Some node LPs could not be solved; the incumbent is not proven optimal.
            match inc_obj {
                Some(_) => (SolveStatus::Feasible, f64::NEG_INFINITY),
                None => (SolveStatus::TimeLimit, f64::NEG_INFINITY),
            }
        } else {
            match inc_obj {
                Some(o) => (SolveStatus::Optimal, o),
                None => (SolveStatus::Infeasible, f64::INFINITY),
            }
        };
        let (incumbent, objective) = match incumbent {
            Some((x, o)) => (Some(x), Some(o)),
            None => (None, None),
        };
        Ok(SolverResult { status, incumbent, objective, bound, wall_time, nodes })
    }
}
