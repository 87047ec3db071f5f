#![allow(dead_code)]

use floorplan::instances::{random_instance, RandomParams, TemplateChoice};
use floorplan::model::{FloorDistance, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One floor, at most 4 edges, 2 room corners, 6 rooms and 3 groups.
pub fn guarded_fp(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let params = RandomParams {
        floors: 1,
        template: TemplateChoice::Random { max_edges: 4, max_corners: 2 },
        groups: rng.gen_range(1..=3),
        sizes: vec![6.0, 9.0, 12.0, 15.0],
        fill_ratio: rng.gen_range(0.3..0.9),
        max_rooms: Some(rng.gen_range(1..=6)),
        ..RandomParams::default()
    };
    random_instance(seed, &params)
}

/// At most 4 floors and 10 rooms.
pub fn guarded_fa(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfa11);
    let params = RandomParams {
        floors: rng.gen_range(1..=4),
        template: TemplateChoice::Random { max_edges: 4, max_corners: 2 },
        groups: rng.gen_range(1..=4),
        sizes: vec![6.0, 9.0, 12.0, 15.0],
        fill_ratio: rng.gen_range(0.3..0.95),
        max_rooms: Some(rng.gen_range(1..=10)),
        floor_distance: if rng.gen_bool(0.5) {
            FloorDistance::Linear { step: 20.0 }
        } else {
            FloorDistance::Quadratic { step: 10.0 }
        },
        ..RandomParams::default()
    };
    random_instance(seed, &params)
}

/// Two or three small floors with at most 5 rooms, for global-vs-split checks.
pub fn tiny_multi(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0002_f100);
    let params = RandomParams {
        floors: rng.gen_range(2..=3),
        template: TemplateChoice::Random { max_edges: 2, max_corners: 1 },
        groups: rng.gen_range(1..=2),
        sizes: vec![6.0, 9.0, 12.0],
        fill_ratio: rng.gen_range(0.2..0.6),
        max_rooms: Some(rng.gen_range(2..=5)),
        floor_distance: FloorDistance::Linear { step: 20.0 },
        ..RandomParams::default()
    };
    random_instance(seed, &params)
}

/// Random multi-floor instance for heuristic checks.
pub fn heuristic_case(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x4e75);
    let named = [
        floorplan::instances::TemplateId::S,
        floorplan::instances::TemplateId::M,
        floorplan::instances::TemplateId::L,
        floorplan::instances::TemplateId::XL,
    ];
    let template = if rng.gen_bool(0.5) {
        TemplateChoice::Named(named[rng.gen_range(0..4)])
    } else {
        TemplateChoice::Random { max_edges: 4, max_corners: 2 }
    };
    let params = RandomParams {
        floors: rng.gen_range(1..=12),
        template,
        groups: rng.gen_range(1..=12),
        sizes: vec![6.0, 8.0, 10.0, 12.0, 15.0, 18.0],
        fill_ratio: rng.gen_range(0.2..0.95),
        ..RandomParams::default()
    };
    random_instance(seed, &params)
}

/// `(K - A) / |F|` is at least the largest size in use.
pub fn reserve_covers_largest_room(instance: &Instance) -> bool {
    let b = &instance.building;
    let reserve = (b.total_capacity() - instance.total_area()) / b.num_floors() as f64;
    instance.max_size_in_use().map_or(true, |m| reserve >= m)
}

/// A corner-free single floor whose rooms fit by area, up to 6 rooms, without
/// any check that they can be placed.
pub fn tight_floor(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1e);
    let params = RandomParams {
        floors: 1,
        template: TemplateChoice::Random { max_edges: 3, max_corners: 0 },
        groups: rng.gen_range(1..=2),
        sizes: vec![6.0, 9.0, 12.0, 15.0, 20.0],
        fill_ratio: rng.gen_range(0.85..1.0),
        max_rooms: Some(6),
        ..RandomParams::default()
    };
    random_instance(seed, &params)
}

/// Single floor with one edge of `capacity` m² (depth 2) and no corners.
pub fn one_edge(capacity: f64, sizes: Vec<f64>, demand: Vec<Vec<u32>>) -> Instance {
    use floorplan::model::{Building, Edge, FloorPlanTemplate, Params};
    let t = FloorPlanTemplate {
        id: "one".into(),
        edges: vec![Edge { id: "e1".into(), capacity, depth: 2.0, length: capacity / 2.0 }],
        corners: Vec::new(),
        distances: vec![vec![0.0]],
        stairs: vec![0.0],
        derived_distances: false,
        geometry: None,
    };
    Instance {
        name: "one-edge".into(),
        building: Building::uniform(t, 1, FloorDistance::default()),
        groups: (1..=demand.len()).map(|g| format!("G{g}")).collect(),
        sizes,
        demand,
        params: Params::default(),
    }
}
