//! Floor planning as an integer program.
//!
//! Variables:
//! * `x[g,s,e]` number of group-`g` rooms of size `s` on edge `e`;
//! * `y[g,s,v,e]` a group-`g` room of size `s` fills corner `v` and extends into `e`;
//! * `z[g,o]` group `g` occupies object `o`;
//! * `u[g,o,o']` group `g` occupies both objects of the unordered pair.
//!
//! The objective sums `δ(o, o') * u[g,o,o']`.

use std::collections::{BTreeMap, BTreeSet};

use crate::milp::{MilpModel, Relation, SolverResult, VarId, FEAS_TOL};
use crate::model::{
    build_object_distances, corner_fit, proximity_cost, CornerRoom, DistanceMatrix, EdgeSlot, Instance, ModelError,
    Placement,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FpError {
    #[error("rooms need {required} m² but only {available} m² are available")]
    InfeasibleByArea { required: f64, available: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot decode solution: {0}")]
    Decode(String),
    #[error("no valid placement exists")]
    Infeasible,
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
}

/// `(group, size, floor, corner, edge)` of a corner option ruled out by the excess rule.
pub type CornerOption = (usize, usize, usize, usize, usize);

/// Where each variable of the FP model lives. Object indices are global
/// (see [`DistanceMatrix`]).
#[derive(Clone, Debug)]
pub struct FpVariableIndex {
    pub x: BTreeMap<EdgeSlot, VarId>,
    pub y: BTreeMap<CornerRoom, VarId>,
    pub z: BTreeMap<(usize, usize), VarId>,
    pub u: BTreeMap<(usize, usize, usize), VarId>,
    pub forbidden_y: Vec<CornerOption>,
    pub distances: DistanceMatrix,
}

fn area_check(instance: &Instance) -> Result<(), FpError> {
    let required = instance.total_area();
    let available = instance.building.total_capacity();
    if required > available + 1e-9 * available.max(1.0) {
        return Err(FpError::InfeasibleByArea { required, available });
    }
    Ok(())
}

/// Largest number of `size` rooms that fit on an edge of `capacity`.
fn edge_room_limit(size: f64, capacity: f64) -> u32 {
    ((capacity + 1e-9) / size).floor().max(0.0).min(u32::MAX as f64) as u32
}

fn aspect_ok(size: f64, depth: f64, max_aspect: Option<f64>) -> bool {
    max_aspect.map_or(true, |limit| {
        let width = size / depth;
        width.max(depth) / width.min(depth) <= limit + 1e-9
    })
}

pub fn build_fp_model(instance: &Instance) -> Result<(MilpModel, FpVariableIndex), FpError> {
    instance.validate()?;
    area_check(instance)?;
    let b = &instance.building;
    let dm = build_object_distances(b)?;
    let mut m = MilpModel::new(format!("fp {}", instance.name));
    let mut x = BTreeMap::new();
    let mut y = BTreeMap::new();
    let mut forbidden_y = Vec::new();

    for g in 0..instance.num_groups() {
        for s in 0..instance.num_sizes() {
            let rho = instance.demand[g][s];
            if rho == 0 {
                continue;
            }
            let size = instance.sizes[s];
            for f in 0..b.num_floors() {
                let t = b.floor(f);
                for (e, edge) in t.edges.iter().enumerate() {
                    let ub = rho.min(edge_room_limit(size, edge.capacity));
                    if ub > 0 && aspect_ok(size, edge.depth, instance.params.max_aspect) {
                        let slot = EdgeSlot { group: g, size: s, floor: f, edge: e };
                        x.insert(slot, m.add_integer(format!("x_{g}_{s}_{f}_{e}"), 0.0, ub as f64));
                    }
                }
                for (v, corner) in t.corners.iter().enumerate() {
                    for &e in &corner.edges {
                        let fits = corner_fit(size, corner, e, instance.params.min_front)
                            && size - corner.capacity <= t.edges[e].capacity + 1e-9;
                        if fits {
                            let key = CornerRoom { group: g, size: s, floor: f, corner: v, edge: e };
                            y.insert(key, m.add_binary(format!("y_{g}_{s}_{f}_{v}_{e}")));
                        } else {
                            forbidden_y.push((g, s, f, v, e));
                        }
                    }
                }
            }
        }
    }

    let mut z = BTreeMap::new();
    for slot in x.keys() {
        let o = dm.edge(slot.floor, slot.edge);
        z.entry((slot.group, o)).or_insert_with(|| m.add_binary(format!("z_{}_{o}", slot.group)));
    }
    for key in y.keys() {
        let o = dm.corner(key.floor, key.corner);
        z.entry((key.group, o)).or_insert_with(|| m.add_binary(format!("z_{}_{o}", key.group)));
    }

    let mut u = BTreeMap::new();
    for g in 0..instance.num_groups() {
        if instance.group_rooms(g) < 2 {
            continue;
        }
        let objs: Vec<usize> = z.range((g, 0)..(g + 1, 0)).map(|(&(_, o), _)| o).collect();
        for (i, &a) in objs.iter().enumerate() {
            for &c in &objs[i + 1..] {
                let d = dm.get(a, c);
                if d > 0.0 {
                    let var = m.add_binary(format!("u_{g}_{a}_{c}"));
                    m.set_objective_coeff(var, d);
                    u.insert((g, a, c), var);
                }
            }
        }
    }

    // Place all rooms.
    for g in 0..instance.num_groups() {
        for s in 0..instance.num_sizes() {
            let rho = instance.demand[g][s];
            if rho == 0 {
                continue;
            }
            let mut terms: Vec<(VarId, f64)> =
                x.iter().filter(|(k, _)| k.group == g && k.size == s).map(|(_, &v)| (v, 1.0)).collect();
            terms.extend(y.iter().filter(|(k, _)| k.group == g && k.size == s).map(|(_, &v)| (v, 1.0)));
            m.add_constraint(format!("place_{g}_{s}"), terms, Relation::Eq, rho as f64);
        }
    }
    // At most one room per corner.
    let mut by_corner: BTreeMap<(usize, usize), Vec<(VarId, f64)>> = BTreeMap::new();
    for (k, &v) in &y {
        by_corner.entry((k.floor, k.corner)).or_default().push((v, 1.0));
    }
    for ((f, v), terms) in by_corner {
        m.add_constraint(format!("corner_{f}_{v}"), terms, Relation::Le, 1.0);
    }
    // Do not overfill an edge.
    let mut by_edge: BTreeMap<(usize, usize), Vec<(VarId, f64)>> = BTreeMap::new();
    for (k, &v) in &x {
        by_edge.entry((k.floor, k.edge)).or_default().push((v, instance.sizes[k.size]));
    }
    for (k, &v) in &y {
        let excess = instance.sizes[k.size] - b.floor(k.floor).corners[k.corner].capacity;
        by_edge.entry((k.floor, k.edge)).or_default().push((v, excess));
    }
    for ((f, e), terms) in by_edge {
        m.add_constraint(format!("edge_{f}_{e}"), terms, Relation::Le, b.floor(f).edges[e].capacity);
    }
    // Occupancy of edges and corners.
    for (k, &v) in &x {
        let zv = z[&(k.group, dm.edge(k.floor, k.edge))];
        let rho = instance.demand[k.group][k.size] as f64;
        let name = format!("zx_{}_{}_{}_{}", k.group, k.size, k.floor, k.edge);
        m.add_constraint(name, vec![(v, 1.0 / rho), (zv, -1.0)], Relation::Le, 0.0);
    }
    for (k, &v) in &y {
        let zv = z[&(k.group, dm.corner(k.floor, k.corner))];
        let name = format!("zy_{}_{}_{}_{}_{}", k.group, k.size, k.floor, k.corner, k.edge);
        m.add_constraint(name, vec![(v, 1.0), (zv, -1.0)], Relation::Le, 0.0);
    }
    // Pairs.
    for (&(g, a, c), &uv) in &u {
        m.add_constraint(
            format!("pair_{g}_{a}_{c}"),
            vec![(z[&(g, a)], 1.0), (z[&(g, c)], 1.0), (uv, -1.0)],
            Relation::Le,
            1.0,
        );
    }

    Ok((m, FpVariableIndex { x, y, z, u, forbidden_y, distances: dm }))
}

/// Reads the placement off an incumbent.
pub fn decode_fp_solution(index: &FpVariableIndex, result: &SolverResult) -> Result<Placement, FpError> {
    let values = result.incumbent.as_ref().ok_or_else(|| FpError::Decode("no incumbent".into()))?;
    let integral = |v: VarId| -> Result<u32, FpError> {
        let raw = *values.get(v.0).ok_or_else(|| FpError::Decode(format!("variable #{} missing", v.0)))?;
        let r = raw.round();
        if (raw - r).abs() > FEAS_TOL || r < 0.0 {
            return Err(FpError::Decode(format!("variable #{} has value {raw}", v.0)));
        }
        Ok(r as u32)
    };
    let mut p = Placement::default();
    for (slot, &v) in &index.x {
        p.add_edge_rooms(*slot, integral(v)?);
    }
    for (key, &v) in &index.y {
        if integral(v)? == 1 {
            p.corner_rooms.push(*key);
        }
    }
    Ok(p)
}

/// One way to put a single room down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Spot {
    Edge(usize, usize),
    Corner(usize, usize, usize),
}

pub const BRUTE_FP_MAX_ROOMS: u32 = 8;
pub const BRUTE_FP_MAX_OBJECTS: usize = 6;

/// Exhaustive search over all valid placements. Rooms of the same group and
/// size are interchangeable, so their spots are enumerated as multisets. Among
/// equally cheap placements the first in enumeration order wins.
pub fn brute_force_fp(instance: &Instance) -> Result<(f64, Placement), FpError> {
    instance.validate()?;
    let b = &instance.building;
    let objects: usize = (0..b.num_floors()).map(|f| b.floor(f).num_objects()).sum();
    if instance.total_rooms() > BRUTE_FP_MAX_ROOMS || objects > BRUTE_FP_MAX_OBJECTS {
        return Err(FpError::TooLarge(format!("{} rooms on {objects} objects", instance.total_rooms())));
    }
    area_check(instance)?;
    let dm = build_object_distances(b)?;

    let mut rooms: Vec<(usize, usize)> = Vec::new();
    for g in 0..instance.num_groups() {
        for s in 0..instance.num_sizes() {
            for _ in 0..instance.demand[g][s] {
                rooms.push((g, s));
            }
        }
    }
    let mut spots_for: Vec<Vec<Spot>> = Vec::with_capacity(rooms.len());
    for &(_, s) in &rooms {
        let size = instance.sizes[s];
        let mut spots = Vec::new();
        for f in 0..b.num_floors() {
            let t = b.floor(f);
            for (e, edge) in t.edges.iter().enumerate() {
                if size <= edge.capacity + 1e-9 && aspect_ok(size, edge.depth, instance.params.max_aspect) {
                    spots.push(Spot::Edge(f, e));
                }
            }
            for (v, corner) in t.corners.iter().enumerate() {
                for &e in &corner.edges {
                    if corner_fit(size, corner, e, instance.params.min_front) {
                        spots.push(Spot::Corner(f, v, e));
                    }
                }
            }
        }
        spots_for.push(spots);
    }

    struct Search<'a> {
        instance: &'a Instance,
        rooms: Vec<(usize, usize)>,
        spots_for: Vec<Vec<Spot>>,
        chosen: Vec<usize>,
        load: Vec<Vec<f64>>,
        corner_used: Vec<Vec<bool>>,
        best: Option<(f64, Vec<Spot>)>,
        dm: &'a DistanceMatrix,
    }

    impl Search<'_> {
        fn cost(&self) -> f64 {
            let mut sets: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for (i, &(g, _)) in self.rooms.iter().enumerate() {
                let o = match self.spots_for[i][self.chosen[i]] {
                    Spot::Edge(f, e) => self.dm.edge(f, e),
                    Spot::Corner(f, v, _) => self.dm.corner(f, v),
                };
                sets.entry(g).or_default().insert(o);
            }
            let mut total = 0.0;
            for set in sets.values() {
                let v: Vec<usize> = set.iter().copied().collect();
                for (i, &a) in v.iter().enumerate() {
                    for &c in &v[i + 1..] {
                        total += self.dm.get(a, c);
                    }
                }
            }
            total
        }

        fn go(&mut self, i: usize) {
            if i == self.rooms.len() {
                let c = self.cost();
                if self.best.as_ref().map_or(true, |b| c < b.0) {
                    let spots = (0..i).map(|k| self.spots_for[k][self.chosen[k]]).collect();
                    self.best = Some((c, spots));
                }
                return;
            }
            let start = if i > 0 && self.rooms[i] == self.rooms[i - 1] { self.chosen[i - 1] } else { 0 };
            let size = self.instance.sizes[self.rooms[i].1];
            let b = &self.instance.building;
            for k in start..self.spots_for[i].len() {
                let spot = self.spots_for[i][k];
                let (f, e, add) = match spot {
                    Spot::Edge(f, e) => (f, e, size),
                    Spot::Corner(f, v, e) => {
                        if self.corner_used[f][v] {
                            continue;
                        }
                        (f, e, size - b.floor(f).corners[v].capacity)
                    }
                };
                if self.load[f][e] + add > b.floor(f).edges[e].capacity + 1e-9 {
                    continue;
                }
                self.load[f][e] += add;
                if let Spot::Corner(_, v, _) = spot {
                    self.corner_used[f][v] = true;
                }
                self.chosen[i] = k;
                self.go(i + 1);
                self.load[f][e] -= add;
                if let Spot::Corner(_, v, _) = spot {
                    self.corner_used[f][v] = false;
                }
            }
        }
    }

    let n = rooms.len();
    let mut search = Search {
        instance,
        rooms,
        spots_for,
        chosen: vec![0; n],
        load: (0..b.num_floors()).map(|f| vec![0.0; b.floor(f).edges.len()]).collect(),
        corner_used: (0..b.num_floors()).map(|f| vec![false; b.floor(f).corners.len()]).collect(),
        best: None,
        dm: &dm,
    };
    search.go(0);
    let (_, spots) = search.best.ok_or(FpError::Infeasible)?;

    let mut p = Placement::default();
    for (&(g, s), spot) in search.rooms.iter().zip(spots) {
        match spot {
            Spot::Edge(f, e) => p.add_edge_rooms(EdgeSlot { group: g, size: s, floor: f, edge: e }, 1),
            Spot::Corner(f, v, e) => {
                p.corner_rooms.push(CornerRoom { group: g, size: s, floor: f, corner: v, edge: e })
            }
        }
    }
    p.corner_rooms.sort();
    Ok((proximity_cost(&p, &dm), p))
}
