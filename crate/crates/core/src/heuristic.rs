//! Greedy floor assignment in three steps: reserve slack on every floor,
//! sweep groups over floors allocating area, then turn allocated area into
//! rooms.

use crate::model::{FloorAssignment, Instance, ModelError};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeuristicError {
    #[error("rooms need {required} m² but the building offers {available} m²")]
    InfeasibleByArea { required: f64, available: f64 },
    #[error("floor {floor} would hold {load} m² of {capacity} m²")]
    Overfill { floor: usize, load: f64, capacity: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Area handed to each group on each floor.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    /// Reserved area per floor.
    pub reserve: Vec<f64>,
    /// Per group, `(floor, area)` with increasing floors and positive areas.
    pub spans: Vec<Vec<(usize, f64)>>,
}

impl Allocation {
    pub fn area(&self, g: usize, f: usize) -> f64 {
        self.spans[g].iter().find(|s| s.0 == f).map_or(0.0, |s| s.1)
    }

    pub fn floors_of_group(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        self.spans[g].iter().map(|s| s.0)
    }
}

/// `count` rooms of one group and size on one floor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoomBatch {
    pub group: usize,
    pub size: usize,
    pub floor: usize,
    pub count: u32,
}

/// Steps one and two with the reserve `(K - A) / |F|` on every floor.
pub fn reserve_and_allocate(instance: &Instance) -> Result<Allocation, HeuristicError> {
    instance.validate()?;
    let b = &instance.building;
    let k = b.total_capacity();
    let a = instance.total_area();
    if a > k + EPS * k.max(1.0) {
        return Err(HeuristicError::InfeasibleByArea { required: a, available: k });
    }
    let reserve = ((k - a) / b.num_floors() as f64).max(0.0);
    allocate(instance, vec![reserve; b.num_floors()])
}

/// Step two with an explicit unreserved area per floor.
pub fn allocate_unreserved(instance: &Instance, unreserved: &[f64]) -> Result<Allocation, HeuristicError> {
    instance.validate()?;
    let b = &instance.building;
    if unreserved.len() != b.num_floors() {
        return Err(ModelError::Invalid("one unreserved area per floor is required".into()).into());
    }
    let reserve = (0..b.num_floors()).map(|f| b.floor_capacity(f) - unreserved[f]).collect();
    allocate(instance, reserve)
}

fn allocate(instance: &Instance, reserve: Vec<f64>) -> Result<Allocation, HeuristicError> {
    let b = &instance.building;
    let floors = b.num_floors();
    let free: Vec<f64> = (0..floors).map(|f| (b.floor_capacity(f) - reserve[f]).max(0.0)).collect();
    let mut spans = Vec::with_capacity(instance.num_groups());
    let mut f = 0;
    let mut avail = free[0];
    for g in 0..instance.num_groups() {
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut give = |f: usize, a: f64| match row.last_mut() {
            Some(last) if last.0 == f => last.1 += a,
            _ => row.push((f, a)),
        };
        let mut need = instance.group_area(g);
        while need > EPS {
            while avail <= EPS && f + 1 < floors {
                f += 1;
                avail = free[f];
            }
            if avail <= EPS {
                // Only rounding dust is left over; it stays with the top floor.
                give(f, need);
                break;
            }
            let take = avail.min(need);
            give(f, take);
            avail -= take;
            need -= take;
        }
        row.retain(|s| s.1 > EPS);
        spans.push(row);
    }
    Ok(Allocation { reserve, spans })
}

/// Step three. Processes floors bottom-up and, on each floor, groups in input
/// order. A group that continues on a later floor gets the largest rooms that
/// fit its allocation, then one smallest room if allocation is left over. On
/// its last floor a group receives all its remaining rooms. Work is linear in
/// the number of `(group, floor)` spans times the number of sizes.
pub fn realize_batches(instance: &Instance, allocation: &Allocation) -> Result<Vec<RoomBatch>, HeuristicError> {
    let b = &instance.building;
    let floors = b.num_floors();
    let mut out = Vec::new();
    let mut remaining = instance.demand.clone();
    let mut by_size: Vec<usize> = (0..instance.num_sizes()).collect();
    by_size.sort_by(|&a, &c| instance.sizes[c].total_cmp(&instance.sizes[a]));
    let mut on_floor: Vec<Vec<(usize, f64)>> = vec![Vec::new(); floors];
    for (g, row) in allocation.spans.iter().enumerate() {
        for &(f, a) in row {
            on_floor[f].push((g, a));
        }
    }

    for (f, groups) in on_floor.iter().enumerate() {
        let mut load = 0.0;
        for &(g, alloc) in groups {
            let mut put = |rem: &mut [u32], s: usize, count: u32| {
                if count > 0 {
                    rem[s] -= count;
                    out.push(RoomBatch { group: g, size: s, floor: f, count });
                    load += count as f64 * instance.sizes[s];
                }
            };
            let rem = &mut remaining[g];
            if allocation.spans[g].last().map(|s| s.0) == Some(f) {
                for s in 0..instance.num_sizes() {
                    let k = rem[s];
                    put(rem, s, k);
                }
                continue;
            }
            let mut left = alloc;
            for &s in &by_size {
                let size = instance.sizes[s];
                let k = rem[s].min(((left + EPS) / size).floor() as u32);
                put(rem, s, k);
                left -= k as f64 * size;
            }
            if left > EPS {
                if let Some(&s) = by_size.iter().rev().find(|&&s| rem[s] > 0) {
                    put(rem, s, 1);
                }
            }
        }
        let capacity = b.floor_capacity(f);
        if load > capacity + EPS * capacity.max(1.0) {
            return Err(HeuristicError::Overfill { floor: f, load, capacity });
        }
    }
    Ok(out)
}

/// Step three as a dense assignment.
pub fn realize_rooms(instance: &Instance, allocation: &Allocation) -> Result<FloorAssignment, HeuristicError> {
    let batches = realize_batches(instance, allocation)?;
    let mut out = FloorAssignment::zeros(instance.num_groups(), instance.num_sizes(), instance.building.num_floors());
    for r in batches {
        out.counts[r.group][r.size][r.floor] += r.count;
    }
    Ok(out)
}

/// All three steps, returning room batches.
pub fn fa_heu_batches(instance: &Instance) -> Result<Vec<RoomBatch>, HeuristicError> {
    let allocation = reserve_and_allocate(instance)?;
    realize_batches(instance, &allocation)
}

/// All three steps.
pub fn fa_heu(instance: &Instance) -> Result<FloorAssignment, HeuristicError> {
    let allocation = reserve_and_allocate(instance)?;
    realize_rooms(instance, &allocation)
}
