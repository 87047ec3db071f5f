use std::collections::{BTreeMap, BTreeSet};

use super::{corner_fit, DistanceMatrix, Instance, ModelError};

/// Key of a batch of identical rooms mapped to one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeSlot {
    pub group: usize,
    pub size: usize,
    pub floor: usize,
    pub edge: usize,
}

/// A single room that fills `corner` and extends into `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CornerRoom {
    pub group: usize,
    pub size: usize,
    pub floor: usize,
    pub corner: usize,
    pub edge: usize,
}

/// Rooms mapped to edges and corner/edge pairs. Sizes are indices into
/// [`Instance::sizes`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Placement {
    pub edge_rooms: BTreeMap<EdgeSlot, u32>,
    pub corner_rooms: Vec<CornerRoom>,
}

impl Placement {
    pub fn add_edge_rooms(&mut self, slot: EdgeSlot, count: u32) {
        if count > 0 {
            *self.edge_rooms.entry(slot).or_insert(0) += count;
        }
    }

    pub fn num_rooms(&self) -> u64 {
        self.edge_rooms.values().map(|&c| c as u64).sum::<u64>() + self.corner_rooms.len() as u64
    }

    /// Global objects holding at least one room of each group. A corner room
    /// occupies its corner only.
    pub fn occupied(&self, distances: &DistanceMatrix) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut out: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (slot, &count) in &self.edge_rooms {
            if count > 0 {
                out.entry(slot.group).or_default().insert(distances.edge(slot.floor, slot.edge));
            }
        }
        for r in &self.corner_rooms {
            out.entry(r.group).or_default().insert(distances.corner(r.floor, r.corner));
        }
        out
    }

    /// Rooms on floor `f`, renumbered to floor 0.
    pub fn floor_part(&self, f: usize) -> Placement {
        let mut out = Placement::default();
        for (slot, &c) in self.edge_rooms.iter().filter(|(s, _)| s.floor == f) {
            out.add_edge_rooms(EdgeSlot { floor: 0, ..*slot }, c);
        }
        out.corner_rooms =
            self.corner_rooms.iter().filter(|r| r.floor == f).map(|r| CornerRoom { floor: 0, ..*r }).collect();
        out
    }

    /// Moves every room of `part` (a single-floor placement) to floor `f`.
    pub fn merge_floor(&mut self, f: usize, part: &Placement) {
        for (slot, &c) in &part.edge_rooms {
            self.add_edge_rooms(EdgeSlot { floor: f, ..*slot }, c);
        }
        self.corner_rooms.extend(part.corner_rooms.iter().map(|r| CornerRoom { floor: f, ..*r }));
        self.corner_rooms.sort();
    }

    /// Room counts per group, size and floor.
    pub fn to_assignment(&self, groups: usize, sizes: usize, floors: usize) -> FloorAssignment {
        let mut a = FloorAssignment::zeros(groups, sizes, floors);
        for (slot, &c) in &self.edge_rooms {
            a.counts[slot.group][slot.size][slot.floor] += c;
        }
        for r in &self.corner_rooms {
            a.counts[r.group][r.size][r.floor] += 1;
        }
        a
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Placed count differs from `ρ(g, s)`.
    Demand { group: usize, size: usize, placed: u64, required: u32 },
    /// Corner room paired with an edge that does not touch the corner.
    NotIncident { floor: usize, corner: usize, edge: usize },
    /// More than one room in a corner.
    CornerShared { floor: usize, corner: usize, rooms: usize },
    /// Corner room without enough excess for a door and a window.
    CornerExcess { floor: usize, corner: usize, size: f64 },
    /// Edge load above capacity.
    EdgeOverfull { floor: usize, edge: usize, load: f64, capacity: f64 },
    /// Edge room more elongated than `max_aspect`.
    Aspect { floor: usize, edge: usize, size: f64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

const LOAD_TOL: f64 = 1e-6;

/// Checks demand satisfaction and the placement rules for every floor.
pub fn validate_placement(instance: &Instance, placement: &Placement) -> Result<ValidationReport, ModelError> {
    let b = &instance.building;
    let check = |kind: &'static str, index: usize, len: usize| {
        if index >= len {
            Err(ModelError::Unknown { kind, index })
        } else {
            Ok(())
        }
    };
    let mut placed = vec![vec![0u64; instance.num_sizes()]; instance.num_groups()];
    let mut load: Vec<Vec<f64>> = (0..b.num_floors()).map(|f| vec![0.0; b.floor(f).edges.len()]).collect();
    let mut corner_use: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut violations = Vec::new();

    for (slot, &count) in &placement.edge_rooms {
        check("group", slot.group, instance.num_groups())?;
        check("size", slot.size, instance.num_sizes())?;
        check("floor", slot.floor, b.num_floors())?;
        let t = b.floor(slot.floor);
        check("edge", slot.edge, t.edges.len())?;
        let size = instance.sizes[slot.size];
        placed[slot.group][slot.size] += count as u64;
        load[slot.floor][slot.edge] += count as f64 * size;
        if let (Some(limit), true) = (instance.params.max_aspect, count > 0) {
            let e = &t.edges[slot.edge];
            let width = size / e.depth;
            if width.max(e.depth) / width.min(e.depth) > limit + 1e-9 {
                violations.push(Violation::Aspect { floor: slot.floor, edge: slot.edge, size });
            }
        }
    }
    for r in &placement.corner_rooms {
        check("group", r.group, instance.num_groups())?;
        check("size", r.size, instance.num_sizes())?;
        check("floor", r.floor, b.num_floors())?;
        let t = b.floor(r.floor);
        check("corner", r.corner, t.corners.len())?;
        check("edge", r.edge, t.edges.len())?;
        let size = instance.sizes[r.size];
        placed[r.group][r.size] += 1;
        *corner_use.entry((r.floor, r.corner)).or_insert(0) += 1;
        let corner = &t.corners[r.corner];
        if corner.side_of(r.edge).is_none() {
            violations.push(Violation::NotIncident { floor: r.floor, corner: r.corner, edge: r.edge });
            continue;
        }
        if !corner_fit(size, corner, r.edge, instance.params.min_front) {
            violations.push(Violation::CornerExcess { floor: r.floor, corner: r.corner, size });
        }
        load[r.floor][r.edge] += (size - corner.capacity).max(0.0);
    }

    for (g, row) in instance.demand.iter().enumerate() {
        for (s, &required) in row.iter().enumerate() {
            if placed[g][s] != required as u64 {
                violations.push(Violation::Demand { group: g, size: s, placed: placed[g][s], required });
            }
        }
    }
    for (&(floor, corner), &rooms) in &corner_use {
        if rooms > 1 {
            violations.push(Violation::CornerShared { floor, corner, rooms });
        }
    }
    for (f, loads) in load.iter().enumerate() {
        for (e, &l) in loads.iter().enumerate() {
            let capacity = b.floor(f).edges[e].capacity;
            if l > capacity + LOAD_TOL * capacity.max(1.0) {
                violations.push(Violation::EdgeOverfull { floor: f, edge: e, load: l, capacity });
            }
        }
    }
    Ok(ValidationReport { violations })
}

/// Room counts per group, size and floor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FloorAssignment {
    /// `counts[g][s][f]`
    pub counts: Vec<Vec<Vec<u32>>>,
}

impl FloorAssignment {
    pub fn zeros(groups: usize, sizes: usize, floors: usize) -> Self {
        Self { counts: vec![vec![vec![0; floors]; sizes]; groups] }
    }

    pub fn num_floors(&self) -> usize {
        self.counts.first().and_then(|r| r.first()).map_or(0, |c| c.len())
    }

    pub fn floor_area(&self, instance: &Instance, f: usize) -> f64 {
        self.counts.iter().flat_map(|row| row.iter().zip(&instance.sizes).map(move |(c, &s)| c[f] as f64 * s)).sum()
    }

    pub fn floors_of_group(&self, g: usize) -> Vec<usize> {
        (0..self.num_floors()).filter(|&f| self.counts[g].iter().any(|c| c[f] > 0)).collect()
    }

    /// Demands of the rooms assigned to floor `f`.
    pub fn floor_demand(&self, f: usize) -> Vec<Vec<u32>> {
        self.counts.iter().map(|row| row.iter().map(|c| c[f]).collect()).collect()
    }

    /// Floors whose assigned area exceeds capacity.
    pub fn overfilled_floors(&self, instance: &Instance) -> Vec<usize> {
        (0..self.num_floors())
            .filter(|&f| {
                let cap = instance.building.floor_capacity(f);
                self.floor_area(instance, f) > cap + LOAD_TOL * cap.max(1.0)
            })
            .collect()
    }

    /// Every demand is assigned exactly once.
    pub fn conserves(&self, instance: &Instance) -> bool {
        self.counts.len() == instance.num_groups()
            && self.counts.iter().zip(&instance.demand).all(|(row, dem)| {
                row.len() == dem.len() && row.iter().zip(dem).all(|(c, &d)| c.iter().sum::<u32>() == d)
            })
    }
}

/// Occupied objects of `placement` per group, keyed by global object index.
pub(crate) fn object_sets(placement: &Placement, distances: &DistanceMatrix) -> Vec<BTreeSet<usize>> {
    placement.occupied(distances).into_values().collect()
}
