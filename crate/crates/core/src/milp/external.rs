//! Runs a third-party solver binary on an exported LP file.
//!
//! The binary is called as `<program> <model.lp> <solution.txt>` with the
//! time limit in seconds in `FLOORPLAN_TIME_LIMIT` (unset means no limit). It
//! must write a solution file of whitespace-separated `key value` lines:
//!
//! ```text
//! status optimal        # optimal | feasible | infeasible | time_limit | unbounded
//! objective 14
//! bound 14              # optional; defaults to the objective when optimal
//! x_g1_s8_e3 2          # one line per non-zero variable, LP names
//! ```
//!
//! The incumbent is re-checked against the model before it is returned.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use super::lp_format::{export_lp, lp_names};
use super::{check_assignment, MilpBackend, MilpModel, SolveError, SolveLimits, SolveStatus, SolverResult};

/// Environment variable naming the default external solver binary.
pub const SOLVER_ENV: &str = "FLOORPLAN_MILP_SOLVER";

#[derive(Clone, Debug)]
pub struct ExternalCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl ExternalCommand {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self { program: program.into(), args: Vec::new() }
    }

    /// The solver named by `FLOORPLAN_MILP_SOLVER`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(SOLVER_ENV).filter(|s| !s.is_empty()).map(Self::new)
    }
}

static COUNTER: AtomicU64 = AtomicU64::new(0);

struct ScratchDir(PathBuf);

impl ScratchDir {
    fn new() -> std::io::Result<Self> {
        let id = COUNTER.fetch_add(1, Ordering::Relaxed);
        let dir = std::env::temp_dir().join(format!("floorplan-milp-{}-{id}", std::process::id()));
        std::fs::create_dir_all(&dir)?;
        Ok(Self(dir))
    }
}

impl Drop for ScratchDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn parse_status(s: &str) -> Option<SolveStatus> {
    Some(match s.to_ascii_lowercase().as_str() {
        "optimal" => SolveStatus::Optimal,
        "feasible" => SolveStatus::Feasible,
        "infeasible" => SolveStatus::Infeasible,
        "time_limit" | "timelimit" | "timeout" => SolveStatus::TimeLimit,
        "unbounded" => SolveStatus::Unbounded,
        _ => return None,
    })
}

impl MilpBackend for ExternalCommand {
    fn name(&self) -> &str {
        "external"
    }

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Result<SolverResult, SolveError> {
        model.validate()?;
        let start = Instant::now();
        let dir = ScratchDir::new()?;
        let lp_path = dir.0.join("model.lp");
        let sol_path = dir.0.join("solution.txt");
        std::fs::write(&lp_path, export_lp(model))?;

        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args).arg(&lp_path).arg(&sol_path);
        match limits.time {
            Some(t) => cmd.env("FLOORPLAN_TIME_LIMIT", format!("{}", t.as_secs_f64())),
            None => cmd.env_remove("FLOORPLAN_TIME_LIMIT"),
        };
        let output =
            cmd.output().map_err(|e| SolveError::External(format!("cannot run {}: {e}", self.program.display())))?;
        if !output.status.success() {
            return Err(SolveError::External(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let text =
            std::fs::read_to_string(&sol_path).map_err(|e| SolveError::External(format!("no solution file: {e}")))?;

        let index: HashMap<String, usize> = lp_names(model).into_iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut values: Vec<f64> = vec![0.0; model.num_vars()];
        let mut status = None;
        let mut objective = None;
        let mut bound = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(key), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(SolveError::External(format!("bad solution line `{line}`")));
            };
            match key {
                "status" => {
                    status =
                        Some(parse_status(val).ok_or_else(|| SolveError::External(format!("unknown status `{val}`")))?)
                }
                "objective" | "bound" => {
                    let v: f64 = val.parse().map_err(|_| SolveError::External(format!("bad number `{val}`")))?;
                    if key == "objective" {
                        objective = Some(v);
                    } else {
                        bound = Some(v);
                    }
                }
                name => {
                    let i =
                        *index.get(name).ok_or_else(|| SolveError::External(format!("unknown variable `{name}`")))?;
                    values[i] = val.parse().map_err(|_| SolveError::External(format!("bad number `{val}`")))?;
                }
            }
        }
        let status = status.ok_or_else(|| SolveError::External("solution file lacks a status".into()))?;
        let has_incumbent = matches!(status, SolveStatus::Optimal | SolveStatus::Feasible)
            || (status == SolveStatus::TimeLimit && objective.is_some());
        let incumbent = if has_incumbent {
            for (x, v) in values.iter_mut().zip(&model.variables) {
                if v.integer {
                    *x = x.round();
                }
            }
            if !check_assignment(model, &values) {
                return Err(SolveError::External("returned assignment violates the model".into()));
            }
            Some(values)
        } else {
            None
        };
        let objective = incumbent.as_ref().map(|x| model.objective_value(x));
        let bound = match status {
            SolveStatus::Optimal => objective.unwrap_or(f64::NEG_INFINITY),
            SolveStatus::Infeasible => f64::INFINITY,
            _ => bound.unwrap_or(f64::NEG_INFINITY),
        };
        Ok(SolverResult { status, incumbent, objective, bound, wall_time: start.elapsed(), nodes: 0 })
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::milp::Relation;
    use std::os::unix::fs::PermissionsExt;

    fn script(dir: &std::path::Path, body: &str) -> ExternalCommand {
        let path = dir.join("solver.sh");
        std::fs::write(&path, format!("#!/bin/sh\n{body}\n")).unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        ExternalCommand::new(path)
    }

    fn model() -> MilpModel {
        let mut m = MilpModel::new("ext");
        let x = m.add_integer("x", 0.0, 5.0);
        m.set_objective_coeff(x, 3.0);
        m.add_constraint("r", vec![(x, 1.0)], Relation::Ge, 2.0);
        m
    }

    #[test]
    fn reads_back_a_solution_file() {
        let dir = tempfile::tempdir().unwrap();
        let cmd = script(
            dir.path(),
            "grep -q 'x >= 2' \"$1\" || exit 3\nprintf 'status optimal\\nobjective 6\\nx 2\\n' > \"$2\"",
        );
        let r = cmd.solve(&model(), &SolveLimits::with_time(5.0)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.incumbent, Some(vec![2.0]));
        assert_eq!((r.objective, r.bound), (Some(6.0), 6.0));
    }

    #[test]
    fn rejects_bad_output() {
        let dir = tempfile::tempdir().unwrap();
        let wrong = script(dir.path(), "printf 'status optimal\\nx 1\\n' > \"$2\"");
        assert!(matches!(wrong.solve(&model(), &SolveLimits::default()), Err(SolveError::External(_))));
        let failing = script(dir.path(), "exit 1");
        assert!(matches!(failing.solve(&model(), &SolveLimits::default()), Err(SolveError::External(_))));
        let unknown = script(dir.path(), "printf 'status optimal\\ny 2\\n' > \"$2\"");
        assert!(matches!(unknown.solve(&model(), &SolveLimits::default()), Err(SolveError::External(_))));
    }

    #[test]
    fn infeasible_has_no_incumbent() {
        let dir = tempfile::tempdir().unwrap();
        let cmd = script(dir.path(), "echo 'status infeasible' > \"$2\"");
        let r = cmd.solve(&model(), &SolveLimits::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.incumbent.is_none());
        assert_eq!(r.bound, f64::INFINITY);
    }
}
