use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ring::{Cell, RingSpec, Segment};
use super::{template, TemplateId};
use crate::model::{Building, FloorDistance, FloorPlanTemplate, Instance, Params};

#[derive(Clone, Debug, PartialEq)]
pub enum TemplateChoice {
    Named(TemplateId),
    /// A fresh ring plan per floor with 1 to `max_edges` edges (at most 4) and
    /// up to `max_corners` room corners (at most 2).
    Random {
        max_edges: usize,
        max_corners: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomParams {
    pub floors: usize,
    pub template: TemplateChoice,
    pub groups: usize,
    /// Distinct room sizes to draw from.
    pub sizes: Vec<f64>,
    /// Target room area as a share of total capacity.
    pub fill_ratio: f64,
    /// Stop after this many rooms even if the target area is not reached.
    pub max_rooms: Option<u32>,
    pub floor_distance: FloorDistance,
    pub params: Params,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            floors: 2,
            template: TemplateChoice::Random { max_edges: 4, max_corners: 2 },
            groups: 3,
            sizes: vec![6.0, 8.0, 12.0, 15.0],
            fill_ratio: 0.7,
            max_rooms: None,
            floor_distance: FloorDistance::default(),
            params: Params::default(),
        }
    }
}

fn half_steps<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let steps = ((hi - lo) * 2.0).round() as u32;
    lo + rng.gen_range(0..=steps) as f64 * 0.5
}

/// A ring plan with depth-3 strips. Edge sides come first in walking order;
/// the remaining sides are blocked.
pub fn random_template<R: Rng>(rng: &mut R, id: &str, max_edges: usize, max_corners: usize) -> FloorPlanTemplate {
    let depth = 3.0;
    let corridor = 1.5;
    let edges = rng.gen_range(1..=max_edges.clamp(1, 4));
    let lx = half_steps(rng, 3.0, 9.0);
    let ly = half_steps(rng, 3.0, 9.0);
    let is_edge_side = |k: usize| k < edges;
    // Corner k sits between side k-1 and side k.
    let mut candidates: Vec<usize> = (0..4).filter(|&k| is_edge_side((k + 3) % 4) && is_edge_side(k)).collect();
    candidates.shuffle(rng);
    let n_corners = rng.gen_range(0..=max_corners.min(2).min(candidates.len()));
    let room_corners: Vec<usize> = candidates[..n_corners].to_vec();

    let mut corners = [Cell::Blocked; 4];
    for &k in &room_corners {
        corners[k] = Cell::Room;
    }
    let free: Vec<usize> = (0..4).filter(|k| !room_corners.contains(k)).collect();
    corners[*free.choose(rng).expect("at most two room corners")] = Cell::Stairs;

    let sides: [Vec<Segment>; 4] = std::array::from_fn(|k| {
        let interior = if k % 2 == 0 { lx } else { ly };
        if !is_edge_side(k) {
            return vec![Segment::Blocked(interior)];
        }
        let at_start = room_corners.contains(&k);
        let at_end = room_corners.contains(&((k + 1) % 4));
        let len = if at_start && at_end { interior } else { half_steps(rng, 2.0, interior) };
        if len >= interior {
            vec![Segment::Edge(interior)]
        } else if at_end {
            vec![Segment::Blocked(interior - len), Segment::Edge(len)]
        } else {
            vec![Segment::Edge(len), Segment::Blocked(interior - len)]
        }
    });
    RingSpec { id: id.to_string(), width: lx + 2.0 * depth, height: ly + 2.0 * depth, depth, corridor, corners, sides }
        .build()
        .expect("random ring specs are consistent")
}

/// Deterministic in `seed`. Rooms are drawn one at a time (uniform group,
/// uniform size among those that still fit) until no size fits under
/// `fill_ratio * K`, so the room area falls short of the target by less than
/// the smallest size unless `max_rooms` stops the draw first.
pub fn random_instance(seed: u64, params: &RandomParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floors = params.floors.max(1);
    let (templates, floor_map) = match &params.template {
        TemplateChoice::Named(id) => (vec![template(*id)], vec![0; floors]),
        TemplateChoice::Random { max_edges, max_corners } => {
            let ts =
                (0..floors).map(|f| random_template(&mut rng, &format!("r{f}"), *max_edges, *max_corners)).collect();
            (ts, (0..floors).collect())
        }
    };
    let building = Building { templates, floors: floor_map, floor_distance: params.floor_distance.clone() };
    let mut sizes = params.sizes.clone();
    sizes.sort_by(f64::total_cmp);
    sizes.dedup();
    let groups = params.groups.max(1);
    let mut demand = vec![vec![0u32; sizes.len()]; groups];
    let target = params.fill_ratio.clamp(0.0, 1.0) * building.total_capacity();
    let mut area = 0.0;
    let mut rooms = 0;
    loop {
        if params.max_rooms.is_some_and(|m| rooms >= m) {
            break;
        }
        let fitting: Vec<usize> = (0..sizes.len()).filter(|&s| area + sizes[s] <= target + 1e-9).collect();
        let Some(&s) = fitting.choose(&mut rng) else {
            break;
        };
        let g = rng.gen_range(0..groups);
        demand[g][s] += 1;
        area += sizes[s];
        rooms += 1;
    }
    Instance {
        name: format!("random-{seed}"),
        building,
        groups: (1..=groups).map(|g| format!("G{g}")).collect(),
        sizes,
        demand,
        params: params.params,
    }
}
