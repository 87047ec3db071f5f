use std::collections::BTreeSet;

use super::placement::object_sets;
use super::{Building, DistanceMatrix, FloorAssignment, Placement};

fn pair_sum(items: &BTreeSet<usize>, d: impl Fn(usize, usize) -> f64) -> f64 {
    let v: Vec<usize> = items.iter().copied().collect();
    let mut total = 0.0;
    for (i, &a) in v.iter().enumerate() {
        for &b in &v[i + 1..] {
            total += d(a, b);
        }
    }
    total
}

/// Sum over groups of `δ(o, o')` for every unordered pair of distinct objects
/// that both hold a room of the group.
pub fn proximity_cost(placement: &Placement, distances: &DistanceMatrix) -> f64 {
    object_sets(placement, distances).iter().map(|set| pair_sum(set, |a, b| distances.get(a, b))).sum()
}

/// Sum over groups of `Δ(f, f')` for every unordered pair of distinct floors
/// that both hold a room of the group.
pub fn fa_cost(assignment: &FloorAssignment, building: &Building) -> f64 {
    (0..assignment.counts.len())
        .map(|g| {
            let floors: BTreeSet<usize> = assignment.floors_of_group(g).into_iter().collect();
            pair_sum(&floors, |a, b| building.delta(a, b))
        })
        .sum()
}
