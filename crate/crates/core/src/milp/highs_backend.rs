//! Backend that delegates to the HiGHS solver.

use std::ffi::CString;
use std::time::Instant;

use highs::{HighsModelStatus, RowProblem, Sense};

use super::{check_assignment, MilpBackend, MilpModel, Relation, SolveError, SolveLimits, SolveStatus, SolverResult};

#[derive(Clone, Debug, Default)]
pub struct Highs {
    /// Worker threads; `None` leaves the choice to HiGHS.
    pub threads: Option<u32>,
}

fn info_double(model: &highs::SolvedModel, key: &str) -> Option<f64> {
    let name = CString::new(key).ok()?;
    let mut value = f64::NAN;
    // SAFETY: the pointer comes from a live model and `value` outlives the call.
    let status = unsafe { highs_sys::Highs_getDoubleInfoValue(model.as_ptr() as *mut _, name.as_ptr(), &mut value) };
    (status == 0 && value.is_finite()).then_some(value)
}

impl MilpBackend for Highs {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Result<SolverResult, SolveError> {
        model.validate()?;
        let start = Instant::now();
        let cost = model.cost_vector();
        let mut pb = RowProblem::default();
        let cols: Vec<_> = model
            .variables
            .iter()
            .zip(&cost)
            .map(|(v, &c)| pb.add_column_with_integrality(c, v.lower..=v.upper, v.integer))
            .collect();
        for row in &model.constraints {
            let terms: Vec<_> = row.terms.iter().map(|&(v, k)| (cols[v.0], k)).collect();
            match row.relation {
                Relation::Le => pb.add_row(f64::NEG_INFINITY..=row.rhs, terms),
                Relation::Ge => pb.add_row(row.rhs..=f64::INFINITY, terms),
                Relation::Eq => pb.add_row(row.rhs..=row.rhs, terms),
            }
        }
        let mut m = pb
            .try_optimise(Sense::Minimise)
            .map_err(|s| SolveError::External(format!("HiGHS rejected the model: {s:?}")))?;
        m.make_quiet();
        m.set_option("mip_rel_gap", limits.gap.max(0.0));
        m.set_option("mip_abs_gap", 1e-9);
        if let Some(t) = limits.time {
            m.set_option("time_limit", t.as_secs_f64());
        }
        if let Some(n) = self.threads {
            m.set_option("threads", n as i32);
        }
        let solved = m.try_solve().map_err(|s| SolveError::External(format!("HiGHS failed: {s:?}")))?;
        let hs = solved.status();

        let mut values: Vec<f64> = solved.get_solution().columns().to_vec();
        for (x, v) in values.iter_mut().zip(&model.variables) {
            if v.integer {
                *x = x.round();
            }
            *x = x.clamp(v.lower, v.upper);
        }
        let candidate = values.len() == model.num_vars() && check_assignment(model, &values);
        let (status, incumbent) = match hs {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty if candidate => {
                (SolveStatus::Optimal, Some(values))
            }
            HighsModelStatus::Infeasible => (SolveStatus::Infeasible, None),
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => (SolveStatus::Unbounded, None),
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ObjectiveBound
            | HighsModelStatus::ObjectiveTarget => {
                if candidate {
                    (SolveStatus::TimeLimit, Some(values))
                } else {
                    (SolveStatus::TimeLimit, None)
                }
            }
            other => return Err(SolveError::External(format!("HiGHS ended with status {other:?}"))),
        };
        let objective = incumbent.as_ref().map(|x| model.objective_value(x));
        let bound = match status {
            SolveStatus::Optimal => objective.unwrap_or(0.0),
            SolveStatus::Infeasible => f64::INFINITY,
            _ => info_double(&solved, "mip_dual_bound").unwrap_or(f64::NEG_INFINITY),
        };
        // A time-limited run that still closed the gap is optimal.
        let status = match (status, objective) {
            (SolveStatus::TimeLimit, Some(obj)) if bound >= obj - 1e-9 => SolveStatus::Optimal,
            _ => status,
        };
        Ok(SolverResult { status, incumbent, objective, bound, wall_time: start.elapsed(), nodes: 0 })
    }
}
