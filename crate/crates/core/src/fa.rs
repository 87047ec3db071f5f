//! Floor assignment as an integer program.
//!
//! `x[g,s,f]` counts group-`g` rooms of size `s` on floor `f`, `z[g,f]` marks
//! occupied floors and `u[g,f,f']` pairs of occupied floors. The objective sums
//! `Δ(f, f') * u[g,f,f']` over unordered floor pairs.

use std::collections::BTreeMap;

use crate::milp::{MilpModel, Relation, SolverResult, VarId, FEAS_TOL};
use crate::model::{fa_cost, FloorAssignment, Instance, ModelError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FaError {
    #[error("rooms need {required} m² but the building offers {available} m²")]
    InfeasibleByArea { required: f64, available: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot decode solution: {0}")]
    Decode(String),
    #[error("no assignment respects the floor capacities")]
    Infeasible,
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
}

#[derive(Clone, Debug, Default)]
pub struct FaVariableIndex {
    pub x: BTreeMap<(usize, usize, usize), VarId>,
    pub z: BTreeMap<(usize, usize), VarId>,
    pub u: BTreeMap<(usize, usize, usize), VarId>,
    groups: usize,
    sizes: usize,
    floors: usize,
}

fn area_check(instance: &Instance) -> Result<(), FaError> {
    let required = instance.total_area();
    let available = instance.building.total_capacity();
    if required > available + 1e-9 * available.max(1.0) {
        return Err(FaError::InfeasibleByArea { required, available });
    }
    Ok(())
}

pub fn build_fa_model(instance: &Instance) -> Result<(MilpModel, FaVariableIndex), FaError> {
    instance.validate()?;
    area_check(instance)?;
    let b = &instance.building;
    let floors = b.num_floors();
    let mut m = MilpModel::new(format!("fa {}", instance.name));
    let mut idx =
        FaVariableIndex { groups: instance.num_groups(), sizes: instance.num_sizes(), floors, ..Default::default() };

    for g in 0..instance.num_groups() {
        for s in 0..instance.num_sizes() {
            let rho = instance.demand[g][s];
            if rho == 0 {
                continue;
            }
            for f in 0..floors {
                let fit = ((b.floor_capacity(f) + 1e-9) / instance.sizes[s]).floor() as u32;
                let ub = rho.min(fit);
                if ub > 0 {
                    idx.x.insert((g, s, f), m.add_integer(format!("x_{g}_{s}_{f}"), 0.0, ub as f64));
                }
            }
        }
    }
    for &(g, _, f) in idx.x.keys() {
        idx.z.entry((g, f)).or_insert_with(|| m.add_binary(format!("z_{g}_{f}")));
    }
    for g in 0..instance.num_groups() {
        if instance.group_rooms(g) < 2 {
            continue;
        }
        let fl: Vec<usize> = idx.z.range((g, 0)..(g + 1, 0)).map(|(&(_, f), _)| f).collect();
        for (i, &a) in fl.iter().enumerate() {
            for &c in &fl[i + 1..] {
                let d = b.delta(a, c);
                if d > 0.0 {
                    let v = m.add_binary(format!("u_{g}_{a}_{c}"));
                    m.set_objective_coeff(v, d);
                    idx.u.insert((g, a, c), v);
                }
            }
        }
    }

    // Assign all rooms.
    for g in 0..instance.num_groups() {
        for s in 0..instance.num_sizes() {
            let rho = instance.demand[g][s];
            if rho == 0 {
                continue;
            }
            let terms = idx.x.range((g, s, 0)..(g, s + 1, 0)).map(|(_, &v)| (v, 1.0)).collect();
            m.add_constraint(format!("assign_{g}_{s}"), terms, Relation::Eq, rho as f64);
        }
    }
    // Do not overfill any floor.
    for f in 0..floors {
        let terms: Vec<(VarId, f64)> =
            idx.x.iter().filter(|(k, _)| k.2 == f).map(|(k, &v)| (v, instance.sizes[k.1])).collect();
        if !terms.is_empty() {
            m.add_constraint(format!("floor_{f}"), terms, Relation::Le, b.floor_capacity(f));
        }
    }
    for (&(g, s, f), &v) in &idx.x {
        let rho = instance.demand[g][s] as f64;
        m.add_constraint(format!("zx_{g}_{s}_{f}"), vec![(v, 1.0 / rho), (idx.z[&(g, f)], -1.0)], Relation::Le, 0.0);
    }
    for (&(g, a, c), &uv) in &idx.u {
        m.add_constraint(
            format!("pair_{g}_{a}_{c}"),
            vec![(idx.z[&(g, a)], 1.0), (idx.z[&(g, c)], 1.0), (uv, -1.0)],
            Relation::Le,
            1.0,
        );
    }
    Ok((m, idx))
}

pub fn decode_fa_solution(index: &FaVariableIndex, result: &SolverResult) -> Result<FloorAssignment, FaError> {
    let values = result.incumbent.as_ref().ok_or_else(|| FaError::Decode("no incumbent".into()))?;
    let mut a = FloorAssignment::zeros(index.groups, index.sizes, index.floors);
    for (&(g, s, f), &v) in &index.x {
        let raw = *values.get(v.0).ok_or_else(|| FaError::Decode(format!("variable #{} missing", v.0)))?;
        let r = raw.round();
        if (raw - r).abs() > FEAS_TOL || r < 0.0 {
            return Err(FaError::Decode(format!("x[{g},{s},{f}] = {raw}")));
        }
        a.counts[g][s][f] = r as u32;
    }
    Ok(a)
}

pub const BRUTE_FA_MAX_ROOMS: u32 = 10;
pub const BRUTE_FA_MAX_FLOORS: usize = 4;

/// Enumerates every split of every `ρ(g, s)` over the floors.
pub fn brute_force_fa(instance: &Instance) -> Result<(f64, FloorAssignment), FaError> {
    instance.validate()?;
    let b = &instance.building;
    let floors = b.num_floors();
    if instance.total_rooms() > BRUTE_FA_MAX_ROOMS || floors > BRUTE_FA_MAX_FLOORS {
        return Err(FaError::TooLarge(format!("{} rooms on {floors} floors", instance.total_rooms())));
    }
    area_check(instance)?;
    let types: Vec<(usize, usize, u32)> = instance
        .demand
        .iter()
        .enumerate()
        .flat_map(|(g, row)| row.iter().enumerate().filter(|(_, &c)| c > 0).map(move |(s, &c)| (g, s, c)))
        .collect();
    let caps: Vec<f64> = (0..floors).map(|f| b.floor_capacity(f)).collect();

    struct Search<'a> {
        instance: &'a Instance,
        types: Vec<(usize, usize, u32)>,
        caps: Vec<f64>,
        used: Vec<f64>,
        current: FloorAssignment,
        best: Option<(f64, FloorAssignment)>,
    }

    impl Search<'_> {
        fn go(&mut self, t: usize) {
            if t == self.types.len() {
                let c = fa_cost(&self.current, &self.instance.building);
                if self.best.as_ref().map_or(true, |b| c < b.0) {
                    self.best = Some((c, self.current.clone()));
                }
                return;
            }
            let (g, s, count) = self.types[t];
            self.split(t, g, s, count, 0);
        }

        fn split(&mut self, t: usize, g: usize, s: usize, left: u32, f: usize) {
            let size = self.instance.sizes[s];
            if f + 1 == self.caps.len() {
                if self.used[f] + left as f64 * size > self.caps[f] + 1e-9 {
                    return;
                }
                self.place(g, s, f, left, size);
                self.go(t + 1);
                self.unplace(g, s, f, left, size);
                return;
            }
            for k in 0..=left {
                if self.used[f] + k as f64 * size > self.caps[f] + 1e-9 {
                    break;
                }
                self.place(g, s, f, k, size);
                self.split(t, g, s, left - k, f + 1);
                self.unplace(g, s, f, k, size);
            }
        }

        fn place(&mut self, g: usize, s: usize, f: usize, k: u32, size: f64) {
            self.current.counts[g][s][f] += k;
            self.used[f] += k as f64 * size;
        }

        fn unplace(&mut self, g: usize, s: usize, f: usize, k: u32, size: f64) {
            self.current.counts[g][s][f] -= k;
            self.used[f] -= k as f64 * size;
        }
    }

    let mut search = Search {
        instance,
        types,
        used: vec![0.0; floors],
        caps,
        current: FloorAssignment::zeros(instance.num_groups(), instance.num_sizes(), floors),
        best: None,
    };
    search.go(0);
    search.best.ok_or(FaError::Infeasible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve, SolveLimits, SolveStatus};
    use crate::model::fixtures::{instance, row_template};
    use crate::model::FloorDistance;

    #[test]
    fn rows_and_pair_variables() {
        let inst = instance(row_template(1, 3.0, 10.0), 3, vec![6.0, 12.0], vec![vec![2, 1], vec![0, 1]]);
        let (m, idx) = build_fa_model(&inst).unwrap();
        for c in &m.constraints {
            let fam = c.name.split('_').next().unwrap();
            assert!(["assign", "floor", "zx", "pair"].contains(&fam), "{}", c.name);
        }
        assert_eq!(idx.u.len(), 3);
        assert!(idx.u.keys().all(|&(g, _, _)| g == 0));
        let x = idx.x[&(0, 0, 1)];
        assert_eq!(m.variables[x.index()].upper, 2.0);
    }

    #[test]
    fn a_group_too_big_for_one_floor_spans_two_adjacent_floors() {
        let mut inst = instance(row_template(1, 3.0, 10.0), 3, vec![6.0, 12.0], vec![vec![3, 2], vec![1, 0]]);
        inst.building.floor_distance = FloorDistance::Linear { step: 20.0 };
        let (m, idx) = build_fa_model(&inst).unwrap();
        let r = solve(&m, &SolveLimits::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        let a = decode_fa_solution(&idx, &r).unwrap();
        assert!(a.conserves(&inst));
        assert_eq!(fa_cost(&a, &inst.building), 20.0);
        assert_eq!(brute_force_fa(&inst).unwrap().0, 20.0);
    }

    #[test]
    fn area_and_size_limits() {
        let inst = instance(row_template(1, 3.0, 2.0), 2, vec![5.0], vec![vec![3]]);
        assert!(matches!(build_fa_model(&inst), Err(FaError::InfeasibleByArea { .. })));
        let inst = instance(row_template(1, 3.0, 2.0), 2, vec![4.0], vec![vec![3]]);
        assert_eq!(brute_force_fa(&inst).unwrap_err(), FaError::Infeasible);
        let big = instance(row_template(1, 3.0, 20.0), 5, vec![1.0], vec![vec![1]]);
        assert!(matches!(brute_force_fa(&big), Err(FaError::TooLarge(_))));
    }
}
