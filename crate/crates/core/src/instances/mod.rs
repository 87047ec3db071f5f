//! Reference floor plans, group rosters, the six named instances and seeded
//! random instances.

mod random;
mod ring;

use std::fmt;
use std::str::FromStr;

pub use random::{random_instance, random_template, RandomParams, TemplateChoice};
pub use ring::{Cell, RingSpec, Segment};

use crate::model::{Building, FloorDistance, FloorPlanTemplate, Instance, Params};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TemplateId {
    S,
    M,
    L,
    XL,
}

impl TemplateId {
    pub const ALL: [TemplateId; 4] = [TemplateId::S, TemplateId::M, TemplateId::L, TemplateId::XL];

    pub fn name(self) -> &'static str {
        match self {
            TemplateId::S => "f_S",
            TemplateId::M => "f_M",
            TemplateId::L => "f_L",
            TemplateId::XL => "f_XL",
        }
    }

    pub fn capacity(self) -> f64 {
        match self {
            TemplateId::S => 99.0,
            TemplateId::M => 171.0,
            TemplateId::L => 318.0,
            TemplateId::XL => 512.0,
        }
    }
}

/// Distances of the small plan; objects are `e1..e4, v1, v2`.
const SMALL_DISTANCES: [[f64; 6]; 6] = [
    [0.0, 5.0, 7.0, 2.0, 8.0, 8.0],
    [5.0, 0.0, 1.0, 2.0, 0.0, 2.0],
    [7.0, 1.0, 0.0, 1.0, 0.0, 0.0],
    [2.0, 2.0, 1.0, 0.0, 2.0, 0.0],
    [8.0, 0.0, 0.0, 2.0, 0.0, 1.0],
    [8.0, 2.0, 0.0, 0.0, 1.0, 0.0],
];
const SMALL_STAIRS: [f64; 6] = [2.0, 2.0, 5.0, 2.0, 5.0, 5.0];

fn ring_spec(id: TemplateId) -> RingSpec {
    use Segment::*;
    let name = id.name().to_string();
    match id {
        TemplateId::S => RingSpec {
            id: name,
            width: 13.5,
            height: 12.0,
            depth: 3.0,
            corridor: 1.5,
            corners: [Cell::Stairs, Cell::Blocked, Cell::Room, Cell::Room],
            sides: [vec![Edge(7.5)], vec![Edge(6.0)], vec![Edge(7.5)], vec![Edge(6.0)]],
        },
        TemplateId::M => RingSpec {
            id: name,
            width: 22.5,
            height: 15.0,
            depth: 3.0,
            corridor: 1.5,
            corners: [Cell::Stairs, Cell::Room, Cell::Room, Cell::Room],
            sides: [vec![Edge(6.0), Blocked(3.0), Edge(7.5)], vec![Edge(9.0)], vec![Edge(16.5)], vec![Edge(9.0)]],
        },
        TemplateId::L => RingSpec {
            id: name,
            width: 32.0,
            height: 21.75,
            depth: 4.0,
            corridor: 2.0,
            corners: [Cell::Stairs, Cell::Room, Cell::Room, Cell::Room],
            sides: [
                vec![Edge(10.0), Blocked(4.0), Edge(10.0)],
                vec![Edge(13.75)],
                vec![Edge(10.0), Blocked(4.0), Edge(10.0)],
                vec![Edge(13.75)],
            ],
        },
        TemplateId::XL => RingSpec {
            id: name,
            width: 45.0,
            height: 33.0,
            depth: 4.0,
            corridor: 2.0,
            corners: [Cell::Room, Cell::Room, Cell::Room, Cell::Room],
            sides: [
                vec![Edge(16.5), Stairs(4.0), Edge(16.5)],
                vec![Edge(25.0)],
                vec![Edge(16.5), Blocked(4.0), Edge(16.5)],
                vec![Edge(10.5), Blocked(4.0), Edge(10.5)],
            ],
        },
    }
}

/// One of the four reference floor plans. The small plan carries its
/// published distance matrix; the others derive distances from geometry.
pub fn template(id: TemplateId) -> FloorPlanTemplate {
    let mut t = ring_spec(id).build().expect("reference ring specs are valid");
    if id == TemplateId::S {
        t.distances = SMALL_DISTANCES.iter().map(|r| r.to_vec()).collect();
        t.stairs = SMALL_STAIRS.to_vec();
        t.derived_distances = false;
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupSetId {
    /// Mathematics chairs.
    M,
    /// Computer science chairs.
    C,
    /// Mathematics groups 1, 2, 4 and 11.
    SM,
    /// Union of M and C.
    MC,
}

const MATH_SIZES: [f64; 3] = [8.0, 15.0, 18.0];
const MATH: [[u32; 3]; 11] = [
    [3, 3, 2],
    [4, 1, 3],
    [5, 1, 3],
    [5, 1, 1],
    [9, 1, 2],
    [11, 1, 5],
    [16, 1, 3],
    [8, 1, 3],
    [4, 1, 3],
    [7, 1, 4],
    [8, 1, 3],
];
const CS_SIZES: [f64; 4] = [10.0, 15.0, 20.0, 25.0];
const CS: [[u32; 4]; 9] = [
    [6, 8, 2, 1],
    [2, 19, 2, 2],
    [3, 10, 1, 1],
    [0, 3, 1, 1],
    [2, 14, 3, 2],
    [3, 17, 2, 2],
    [0, 15, 2, 2],
    [3, 28, 1, 2],
    [1, 14, 1, 1],
];
const SMALL_MATH: [usize; 4] = [1, 2, 4, 11];

/// Group ids, sorted distinct sizes and `demand[g][s]` of a roster.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSet {
    pub groups: Vec<String>,
    pub sizes: Vec<f64>,
    pub demand: Vec<Vec<u32>>,
}

impl GroupSet {
    fn from_rows(prefix: &str, numbers: &[usize], sizes: &[f64], rows: &[&[u32]]) -> Self {
        Self {
            groups: numbers.iter().map(|n| format!("{prefix}{n}")).collect(),
            sizes: sizes.to_vec(),
            demand: rows.iter().map(|r| r.to_vec()).collect(),
        }
    }

    fn union(a: GroupSet, b: GroupSet) -> Self {
        let mut sizes: Vec<f64> = a.sizes.iter().chain(&b.sizes).copied().collect();
        sizes.sort_by(f64::total_cmp);
        sizes.dedup();
        let remap = |set: &GroupSet| -> Vec<Vec<u32>> {
            set.demand
                .iter()
                .map(|row| {
                    let mut out = vec![0; sizes.len()];
                    for (c, s) in row.iter().zip(&set.sizes) {
                        out[sizes.iter().position(|x| x == s).expect("size present")] += c;
                    }
                    out
                })
                .collect()
        };
        let mut demand = remap(&a);
        demand.extend(remap(&b));
        let mut groups = a.groups;
        groups.extend(b.groups);
        Self { groups, sizes, demand }
    }

    pub fn total_rooms(&self) -> u32 {
        self.demand.iter().flatten().sum()
    }
}

pub fn group_set(id: GroupSetId) -> GroupSet {
    let math = || {
        let rows: Vec<&[u32]> = MATH.iter().map(|r| r.as_slice()).collect();
        GroupSet::from_rows("M", &(1..=11).collect::<Vec<_>>(), &MATH_SIZES, &rows)
    };
    let cs = || {
        let rows: Vec<&[u32]> = CS.iter().map(|r| r.as_slice()).collect();
        GroupSet::from_rows("C", &(1..=9).collect::<Vec<_>>(), &CS_SIZES, &rows)
    };
    match id {
        GroupSetId::M => math(),
        GroupSetId::C => cs(),
        GroupSetId::SM => {
            let rows: Vec<&[u32]> = SMALL_MATH.iter().map(|&n| MATH[n - 1].as_slice()).collect();
            GroupSet::from_rows("M", &SMALL_MATH, &MATH_SIZES, &rows)
        }
        GroupSetId::MC => GroupSet::union(math(), cs()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedInstanceId {
    SM3M,
    M18S,
    M9M,
    M3XL,
    C11L,
    MC15L,
}

impl NamedInstanceId {
    pub const ALL: [NamedInstanceId; 6] = [
        NamedInstanceId::SM3M,
        NamedInstanceId::M18S,
        NamedInstanceId::M9M,
        NamedInstanceId::M3XL,
        NamedInstanceId::C11L,
        NamedInstanceId::MC15L,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedInstanceId::SM3M => "sM-3M",
            NamedInstanceId::M18S => "M-18S",
            NamedInstanceId::M9M => "M-9M",
            NamedInstanceId::M3XL => "M-3XL",
            NamedInstanceId::C11L => "C-11L",
            NamedInstanceId::MC15L => "MC-15L",
        }
    }

    /// Group set, floor plan and number of floors.
    pub fn composition(self) -> (GroupSetId, TemplateId, usize) {
        match self {
            NamedInstanceId::SM3M => (GroupSetId::SM, TemplateId::M, 3),
            NamedInstanceId::M18S => (GroupSetId::M, TemplateId::S, 18),
            NamedInstanceId::M9M => (GroupSetId::M, TemplateId::M, 9),
            NamedInstanceId::M3XL => (GroupSetId::M, TemplateId::XL, 3),
            NamedInstanceId::C11L => (GroupSetId::C, TemplateId::L, 11),
            NamedInstanceId::MC15L => (GroupSetId::MC, TemplateId::L, 15),
        }
    }
}

impl fmt::Display for NamedInstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedInstanceId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NamedInstanceId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown instance `{s}`"))
    }
}

/// A named instance with floors `|j - i| * 20` m apart.
pub fn named_instance(id: NamedInstanceId) -> Instance {
    named_instance_with(id, FloorDistance::Linear { step: 20.0 })
}

pub fn named_instance_with(id: NamedInstanceId, floor_distance: FloorDistance) -> Instance {
    let (set, tpl, floors) = id.composition();
    let gs = group_set(set);
    Instance {
        name: id.name().to_string(),
        building: Building::uniform(template(tpl), floors, floor_distance),
        groups: gs.groups,
        sizes: gs.sizes,
        demand: gs.demand,
        params: Params::default(),
    }
}
