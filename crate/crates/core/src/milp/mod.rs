//! Solver-agnostic mixed-integer linear programs.
//!
//! A [`MilpModel`] is a minimisation problem over bounded variables, some of
//! which are integral. Models can be solved by the built-in
//! [`BranchAndBound`] engine, exported to LP format with [`export_lp`], or
//! handed to any other engine that implements [`MilpBackend`].

mod bnb;
mod external;
#[cfg(feature = "highs")]
mod highs_backend;
mod lp_format;
mod simplex;

use std::collections::HashSet;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bnb::BranchAndBound;
pub use external::{ExternalCommand, SOLVER_ENV};
#[cfg(feature = "highs")]
pub use highs_backend::Highs;
pub use lp_format::{export_lp, parse_lp, LpParseError};

/// Feasibility tolerance used for bounds, rows and integrality.
pub const FEAS_TOL: f64 = 1e-6;

/// Index of a variable inside a [`MilpModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl Variable {
    pub fn is_binary(&self) -> bool {
        self.integer && self.lower == 0.0 && self.upper == 1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// A linear row `Σ coeff·var  (≤ | = | ≥)  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateName(String),
    #[error("variable `{name}` has lower bound {lower} above upper bound {upper}")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("variable `{0}` has a NaN bound")]
    NanBound(String),
    #[error("constraint `{constraint}` references unknown variable index {index}")]
    UnknownVariable { constraint: String, index: usize },
    #[error("objective references unknown variable index {0}")]
    UnknownObjectiveVariable(usize),
    #[error("non-finite coefficient in `{0}`")]
    NonFiniteCoefficient(String),
}

/// A minimisation MILP.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Sparse objective coefficients; the sense is always minimise.
    pub objective: Vec<(VarId, f64)>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Self::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, integer: bool) -> VarId {
        self.variables.push(Variable { name: name.into(), lower, upper, integer });
        VarId(self.variables.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, 1.0, true)
    }

    pub fn add_integer(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, lower, upper, true)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, lower, upper, false)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint { name: name.into(), terms, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn set_objective_coeff(&mut self, var: VarId, coeff: f64) {
        if let Some(term) = self.objective.iter_mut().find(|(v, _)| *v == var) {
            term.1 = coeff;
        } else {
            self.objective.push((var, coeff));
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    /// Dense objective vector.
    pub fn cost_vector(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variables.len()];
        for &(v, k) in &self.objective {
            c[v.0] += k;
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = HashSet::with_capacity(self.variables.len());
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
            if v.lower.is_nan() || v.upper.is_nan() {
                return Err(ModelError::NanBound(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(ModelError::InvertedBounds { name: v.name.clone(), lower: v.lower, upper: v.upper });
            }
        }
        let n = self.variables.len();
        for c in &self.constraints {
            for &(v, k) in &c.terms {
                if v.0 >= n {
                    return Err(ModelError::UnknownVariable { constraint: c.name.clone(), index: v.0 });
                }
                if !k.is_finite() {
                    return Err(ModelError::NonFiniteCoefficient(c.name.clone()));
                }
            }
            if !c.rhs.is_finite() {
                return Err(ModelError::NonFiniteCoefficient(c.name.clone()));
            }
        }
        for &(v, k) in &self.objective {
            if v.0 >= n {
                return Err(ModelError::UnknownObjectiveVariable(v.0));
            }
            if !k.is_finite() {
                return Err(ModelError::NonFiniteCoefficient("objective".into()));
            }
        }
        Ok(())
    }
}

/// True iff `values` satisfies bounds, integrality and every row within [`FEAS_TOL`].
pub fn check_assignment(model: &MilpModel, values: &[f64]) -> bool {
    if values.len() != model.variables.len() {
        return false;
    }
    for (v, &x) in model.variables.iter().zip(values) {
        if !x.is_finite() || x < v.lower - FEAS_TOL || x > v.upper + FEAS_TOL {
            return false;
        }
        if v.integer && (x - x.round()).abs() > FEAS_TOL {
            return false;
        }
    }
    model.constraints.iter().all(|c| c.violation(values) <= FEAS_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    Unbounded,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::Unbounded => "unbounded",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveLimits {
    pub time: Option<Duration>,
    /// Relative optimality gap at which the search stops.
    pub gap: f64,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self { time: None, gap: 0.0 }
    }
}

impl SolveLimits {
    pub fn with_time(seconds: f64) -> Self {
        Self { time: Some(Duration::from_secs_f64(seconds)), gap: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub status: SolveStatus,
    /// Best integer-feasible assignment, indexed like `MilpModel::variables`.
    pub incumbent: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub wall_time: Duration,
    pub nodes: u64,
}

impl SolverResult {
    pub fn has_incumbent(&self) -> bool {
        self.incumbent.is_some()
    }

    pub fn value(&self, var: VarId) -> Option<f64> {
        self.incumbent.as_ref().map(|x| x[var.0])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("malformed model: {0}")]
    Model(#[from] ModelError),
    #[error("external solver failed: {0}")]
    External(String),
    #[error("model with {rows} rows and {cols} columns is too large for the built-in engine")]
    TooLarge { rows: usize, cols: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that can solve a [`MilpModel`] under the [`SolverResult`] contract:
/// an `Optimal` status carries an incumbent whose objective equals the bound,
/// and every incumbent passes [`check_assignment`].
pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Result<SolverResult, SolveError>;
}

/// Solves with the built-in branch-and-bound engine.
pub fn solve(model: &MilpModel, limits: &SolveLimits) -> Result<SolverResult, SolveError> {
    BranchAndBound::default().solve(model, limits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_duplicates_and_bad_bounds() {
        let mut m = MilpModel::new("t");
        m.add_binary("x");
        m.add_binary("x");
        assert_eq!(m.validate(), Err(ModelError::DuplicateName("x".into())));

        let mut m = MilpModel::new("t");
        m.add_var("x", 2.0, 1.0, false);
        assert!(matches!(m.validate(), Err(ModelError::InvertedBounds { .. })));

        let mut m = MilpModel::new("t");
        m.add_binary("x");
        m.add_constraint("r", vec![(VarId(3), 1.0)], Relation::Le, 1.0);
        assert!(matches!(m.validate(), Err(ModelError::UnknownVariable { index: 3, .. })));
    }

    #[test]
    fn check_assignment_cases() {
        let mut m = MilpModel::new("t");
        let x = m.add_binary("x");
        let y = m.add_binary("y");
        assert!(check_assignment(&m, &[0.0, 0.0]));
        m.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 1.0);
        assert!(!check_assignment(&m, &[0.0, 0.0]));
        assert!(check_assignment(&m, &[1.0, 0.0]));
        assert!(!check_assignment(&m, &[0.5, 0.5]));
        assert!(!check_assignment(&m, &[2.0, 0.0]));
    }

    #[test]
    fn malformed_model_is_an_error_not_a_panic() {
        let mut m = MilpModel::new("t");
        m.add_binary("x");
        m.objective.push((VarId(9), 1.0));
        assert!(matches!(solve(&m, &SolveLimits::default()), Err(SolveError::Model(_))));
    }
}
