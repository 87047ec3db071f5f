//! Dense bounded-variable dual simplex used for LP relaxations.
//!
//! Every row gets a slack with coefficient `+1` (`≤` rows: `s ≥ 0`, `≥` rows:
//! `s ≤ 0`, `=` rows: `s = 0`), so the slack basis is always available.
//! Nonbasic variables sit at whichever bound their reduced cost prefers, which
//! makes any basis dual feasible as long as those bounds are finite. That is
//! what lets branch-and-bound nodes change bounds and re-enter the dual
//! simplex from the previous basis without any phase-one work.

use std::time::Instant;

use super::{MilpModel, Relation};

/// Stand-in for an infinite bound on a nonbasic variable whose reduced cost
/// points towards it. Landing on it at optimality means the LP is unbounded.
const ARTIFICIAL_BOUND: f64 = 1e7;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
    IterationLimit,
    TimedOut,
}

pub(crate) struct DualSimplex {
    rows: usize,
    cols: usize,
    structurals: usize,
    /// `B⁻¹ [A | I]`, row-major.
    tab: Vec<f64>,
    /// `B⁻¹ b`.
    beta: Vec<f64>,
    sparse_rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    pivots_since_refactor: usize,
    scratch_cols: Vec<usize>,
}

impl DualSimplex {
    pub(crate) fn new(model: &MilpModel) -> Self {
        let rows = model.constraints.len();
        let structurals = model.variables.len();
        let cols = structurals + rows;

        let mut sparse_rows = Vec::with_capacity(rows);
        let mut rhs = Vec::with_capacity(rows);
        for c in &model.constraints {
            let mut terms: Vec<(usize, f64)> = Vec::with_capacity(c.terms.len());
            for &(v, k) in &c.terms {
                if let Some(t) = terms.iter_mut().find(|t| t.0 == v.0) {
                    t.1 += k;
                } else {
                    terms.push((v.0, k));
                }
            }
            terms.retain(|t| t.1 != 0.0);
            sparse_rows.push(terms);
            rhs.push(c.rhs);
        }

        let mut lower = Vec::with_capacity(cols);
        let mut upper = Vec::with_capacity(cols);
        for v in &model.variables {
            lower.push(v.lower);
            upper.push(v.upper);
        }
        for c in &model.constraints {
            let (l, u) = match c.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }

        let mut cost = model.cost_vector();
        cost.resize(cols, 0.0);

        let mut lp = Self {
            rows,
            cols,
            structurals,
            tab: Vec::new(),
            beta: Vec::new(),
            sparse_rows,
            rhs,
            reduced: cost.clone(),
            cost,
            basis: (structurals..cols).collect(),
            state: vec![State::Lower; cols],
            lower,
            upper,
            x: vec![0.0; cols],
            pivots_since_refactor: 0,
            scratch_cols: Vec::new(),
        };
        lp.reset_to_slack_basis();
        lp
    }

    fn reset_to_slack_basis(&mut self) {
        let (m, n, ns) = (self.rows, self.cols, self.structurals);
        self.tab = vec![0.0; m * n];
        for (i, row) in self.sparse_rows.iter().enumerate() {
            for &(j, k) in row {
                self.tab[i * n + j] = k;
            }
            self.tab[i * n + ns + i] = 1.0;
        }
        self.beta = self.rhs.clone();
        self.basis = (ns..n).collect();
        for j in 0..n {
            self.state[j] = if j >= ns { State::Basic } else { State::Lower };
        }
        self.reduced = self.cost.clone();
        self.pivots_since_refactor = 0;
    }

    /// Rebuilds `B⁻¹[A|I]` for the current basis from the original rows.
    pub(crate) fn refactor(&mut self) {
        let (m, n, ns) = (self.rows, self.cols, self.structurals);
        let basic: Vec<usize> = self.basis.clone();
        let mut tab = vec![0.0; m * n];
        for (i, row) in self.sparse_rows.iter().enumerate() {
            for &(j, k) in row {
                tab[i * n + j] = k;
            }
            tab[i * n + ns + i] = 1.0;
        }
        let mut beta = self.rhs.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        // Slacks first: their columns are unit vectors and pivot cleanly.
        let mut order = basic.clone();
        order.sort_by_key(|&j| if j >= ns { 0 } else { 1 });
        for &col in &order {
            let mut best = None;
            let mut best_abs = 1e-11;
            for i in 0..m {
                if !assigned[i] {
                    let a = tab[i * n + col].abs();
                    if a > best_abs {
                        best_abs = a;
                        best = Some(i);
                    }
                }
            }
            let Some(r) = best else {
                self.reset_to_slack_basis();
                return;
            };
            assigned[r] = true;
            new_basis[r] = col;
            gauss_jordan(&mut tab, &mut beta, m, n, r, col, &mut self.scratch_cols);
        }
        self.tab = tab;
        self.beta = beta;
        self.basis = new_basis;
        for j in 0..n {
            if self.state[j] == State::Basic && !self.basis.contains(&j) {
                self.state[j] = State::Lower;
            }
        }
        for &j in &self.basis {
            self.state[j] = State::Basic;
        }
        self.recompute_reduced_costs();
        self.pivots_since_refactor = 0;
    }

    fn recompute_reduced_costs(&mut self) {
        let n = self.cols;
        let mut d = self.cost.clone();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                let row = &self.tab[i * n..(i + 1) * n];
                for j in 0..n {
                    d[j] -= cb * row[j];
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.reduced = d;
    }

    /// Replaces the structural bounds (slack bounds never change).
    pub(crate) fn set_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        self.lower[..self.structurals].copy_from_slice(lower);
        self.upper[..self.structurals].copy_from_slice(upper);
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.x[..self.structurals]
    }

    fn place_nonbasic(&mut self) -> bool {
        let mut artificial = false;
        for j in 0..self.cols {
            if self.state[j] == State::Basic {
                continue;
            }
            let (l, u, d) = (self.lower[j], self.upper[j], self.reduced[j]);
            let side = if l == u || d > DUAL_TOL {
                State::Lower
            } else if d < -DUAL_TOL || (self.state[j] == State::Upper && u.is_finite()) {
                State::Upper
            } else if l.is_finite() {
                State::Lower
            } else if u.is_finite() {
                State::Upper
            } else {
                State::Lower
            };
            self.state[j] = side;
            self.x[j] = match side {
                State::Lower if l.is_finite() => l,
                State::Lower => {
                    artificial = true;
                    if u.is_finite() {
                        u.min(0.0) - ARTIFICIAL_BOUND
                    } else {
                        -ARTIFICIAL_BOUND
                    }
                }
                State::Upper if u.is_finite() => u,
                State::Upper => {
                    artificial = true;
                    l.max(0.0) + ARTIFICIAL_BOUND
                }
                State::Basic => unreachable!(),
            };
        }
        artificial
    }

    fn compute_basic_values(&mut self) {
        let n = self.cols;
        let nonzero: Vec<(usize, f64)> =
            (0..n).filter(|&j| self.state[j] != State::Basic && self.x[j] != 0.0).map(|j| (j, self.x[j])).collect();
        for i in 0..self.rows {
            let row = &self.tab[i * n..(i + 1) * n];
            let mut v = self.beta[i];
            for &(j, xj) in &nonzero {
                v -= row[j] * xj;
            }
            self.x[self.basis[i]] = v;
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        let tol = PRIMAL_TOL * (1.0 + v.abs());
        if v < self.lower[j] - tol {
            self.lower[j] - v
        } else if v > self.upper[j] + tol {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    pub(crate) fn solve(&mut self, deadline: Option<Instant>) -> LpOutcome {
        let outcome = self.run(deadline);
        if outcome == LpOutcome::IterationLimit {
            // Numerical trouble or stalling: start over from a clean basis once.
            self.reset_to_slack_basis();
            return self.run(deadline);
        }
        outcome
    }

    fn run(&mut self, deadline: Option<Instant>) -> LpOutcome {
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
        let mut artificial = self.place_nonbasic();
        self.compute_basic_values();
        let max_iter = 50 * (self.rows + self.cols) + 1000;
        let n = self.cols;
        let mut iter = 0usize;
        loop {
            iter += 1;
            if iter > max_iter {
                return LpOutcome::IterationLimit;
            }
            if iter % 32 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        return LpOutcome::TimedOut;
                    }
                }
            }

            // Leaving row: the largest bound violation.
            let mut leave = None;
            let mut worst = 0.0;
            for i in 0..self.rows {
                let inf = self.infeasibility(self.basis[i]);
                if inf > worst {
                    worst = inf;
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                break;
            };
            let leaving = self.basis[r];
            let below = self.x[leaving] < self.lower[leaving];
            let target = if below { self.lower[leaving] } else { self.upper[leaving] };

            // Harris two-pass ratio test.
            let row = &self.tab[r * n..(r + 1) * n];
            let mut bound = f64::INFINITY;
            for j in 0..n {
                let st = self.state[j];
                if st == State::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = row[j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let dir = if st == State::Lower { 1.0 } else { -1.0 };
                let eligible = if below { a * dir < 0.0 } else { a * dir > 0.0 };
                if !eligible {
                    continue;
                }
                let ratio = ((self.reduced[j] * dir).max(0.0) + DUAL_TOL) / a.abs();
                if ratio < bound {
                    bound = ratio;
                }
            }
            if !bound.is_finite() {
                return LpOutcome::Infeasible;
            }
            let mut enter = None;
            let mut best_abs = 0.0;
            for j in 0..n {
                let st = self.state[j];
                if st == State::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = row[j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let dir = if st == State::Lower { 1.0 } else { -1.0 };
                let eligible = if below { a * dir < 0.0 } else { a * dir > 0.0 };
                if !eligible {
                    continue;
                }
                let ratio = (self.reduced[j] * dir).max(0.0) / a.abs();
                if ratio <= bound && a.abs() > best_abs {
                    best_abs = a.abs();
                    enter = Some(j);
                }
            }
            let Some(q) = enter else {
                return LpOutcome::Infeasible;
            };
            if self.state[q] == State::Lower && !self.lower[q].is_finite()
                || self.state[q] == State::Upper && !self.upper[q].is_finite()
            {
                artificial = true;
            }

            let alpha = row[q];
            let delta = (self.x[leaving] - target) / alpha;
            // Primal update.
            for i in 0..self.rows {
                let a = self.tab[i * n + q];
                if a != 0.0 {
                    let b = self.basis[i];
                    self.x[b] -= a * delta;
                }
            }
            self.x[q] += delta;
            self.x[leaving] = target;

            // Dual update.
            let theta = self.reduced[q] / alpha;
            if theta != 0.0 {
                for j in 0..n {
                    let a = self.tab[r * n + j];
                    if a != 0.0 {
                        self.reduced[j] -= theta * a;
                    }
                }
            }
            self.reduced[q] = 0.0;
            self.reduced[leaving] = -theta;

            gauss_jordan(&mut self.tab, &mut self.beta, self.rows, n, r, q, &mut self.scratch_cols);
            self.basis[r] = q;
            self.state[q] = State::Basic;
            self.state[leaving] = if below { State::Lower } else { State::Upper };
            self.pivots_since_refactor += 1;
        }

        if artificial {
            for j in 0..n {
                if self.state[j] != State::Basic
                    && self.x[j].abs() >= ARTIFICIAL_BOUND * 0.5
                    && self.reduced[j].abs() > DUAL_TOL
                {
                    return LpOutcome::Unbounded;
                }
            }
        }
        let obj: f64 = (0..self.structurals).map(|j| self.cost[j] * self.x[j]).sum();
        LpOutcome::Optimal(obj)
    }
}

/// Pivots column `col` into row `r` of a row-major `m × n` tableau.
fn gauss_jordan(tab: &mut [f64], beta: &mut [f64], m: usize, n: usize, r: usize, col: usize, nz: &mut Vec<usize>) {
    let piv = tab[r * n + col];
    let inv = 1.0 / piv;
    nz.clear();
    for j in 0..n {
        let v = tab[r * n + j];
        if v != 0.0 {
            tab[r * n + j] = v * inv;
            nz.push(j);
        }
    }
    tab[r * n + col] = 1.0;
    beta[r] *= inv;
    let (head, rest) = tab.split_at_mut(r * n);
    let (pivot_row, tail) = rest.split_at_mut(n);
    let br = beta[r];
    let update = |row: &mut [f64], b: &mut f64| {
        let f = row[col];
        if f != 0.0 {
            for &j in nz.iter() {
                row[j] -= f * pivot_row[j];
            }
            row[col] = 0.0;
            *b -= f * br;
        }
    };
    for i in 0..r {
        let (row, b) = (&mut head[i * n..(i + 1) * n], &mut beta[i]);
        update(row, b);
    }
    for i in (r + 1)..m {
        let k = i - r - 1;
        update(&mut tail[k * n..(k + 1) * n], &mut beta[i]);
    }
}
