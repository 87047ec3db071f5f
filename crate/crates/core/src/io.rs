//! JSON documents for instances (`floorplan/1`) and solutions
//! (`floorplan-solution/1`).
//!
//! Instances round-trip exactly: writing a parsed document reproduces the
//! original bytes when it was written by [`instance_to_json`]. Solutions name
//! groups, rooms and objects by id and size value; all wall-clock figures live
//! under `provenance` so the rest of the document is deterministic.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::milp::SolveStatus;
use crate::model::{
    Building, CornerRoom, EdgeSlot, FloorDistance, FloorPlanTemplate, Instance, ModelError, Params, Placement,
};
use crate::pipeline::{FaReport, FloorReport, Fraction, Mode, MultiFloorSolution};

pub const INSTANCE_FORMAT: &str = "floorplan/1";
pub const SOLUTION_FORMAT: &str = "floorplan-solution/1";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format `{found}`, expected `{expected}`")]
    Format { found: String, expected: &'static str },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Reference(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupDoc {
    id: String,
    /// One count per entry of `sizes`.
    demand: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format: String,
    name: String,
    templates: Vec<FloorPlanTemplate>,
    /// Template index per floor, bottom to top.
    floors: Vec<usize>,
    floor_distance: FloorDistance,
    params: Params,
    sizes: Vec<f64>,
    groups: Vec<GroupDoc>,
}

fn check_format(found: &str, expected: &'static str) -> Result<(), IoError> {
    if found == expected {
        Ok(())
    } else {
        Err(IoError::Format { found: found.to_string(), expected })
    }
}

pub fn instance_to_json(instance: &Instance) -> String {
    let doc = InstanceDoc {
        format: INSTANCE_FORMAT.into(),
        name: instance.name.clone(),
        templates: instance.building.templates.clone(),
        floors: instance.building.floors.clone(),
        floor_distance: instance.building.floor_distance.clone(),
        params: instance.params,
        sizes: instance.sizes.clone(),
        groups: instance
            .groups
            .iter()
            .zip(&instance.demand)
            .map(|(id, demand)| GroupDoc { id: id.clone(), demand: demand.clone() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("instance documents always serialize");
    s.push('\n');
    s
}

/// Parses and validates an instance document.
pub fn instance_from_json(text: &str) -> Result<Instance, IoError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    check_format(&doc.format, INSTANCE_FORMAT)?;
    let instance = Instance {
        name: doc.name,
        building: Building { templates: doc.templates, floors: doc.floors, floor_distance: doc.floor_distance },
        groups: doc.groups.iter().map(|g| g.id.clone()).collect(),
        sizes: doc.sizes,
        demand: doc.groups.into_iter().map(|g| g.demand).collect(),
        params: doc.params,
    };
    instance.validate()?;
    Ok(instance)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRoomsDoc {
    group: String,
    size: f64,
    edge: String,
    count: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CornerRoomDoc {
    group: String,
    size: f64,
    corner: String,
    edge: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FloorDoc {
    floor: usize,
    /// Reduced fraction such as `166/171`.
    factor: String,
    factor_value: f64,
    status: String,
    attempts: u32,
    cost: f64,
    edge_rooms: Vec<EdgeRoomsDoc>,
    corner_rooms: Vec<CornerRoomDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaDoc {
    method: String,
    status: String,
    cost: f64,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ProvenanceDoc {
    backend: String,
    wall_time_s: f64,
    floor_times_s: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fa_time_s: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    format: String,
    instance: String,
    mode: Mode,
    status: String,
    cost: f64,
    floors_scaled: usize,
    floors: Vec<FloorDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    floor_assignment: Option<FaDoc>,
    provenance: ProvenanceDoc,
}

pub fn parse_status(s: &str) -> Option<SolveStatus> {
    [
        SolveStatus::Optimal,
        SolveStatus::Feasible,
        SolveStatus::Infeasible,
        SolveStatus::TimeLimit,
        SolveStatus::Unbounded,
    ]
    .into_iter()
    .find(|st| st.as_str() == s)
}

fn round_ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e3).round() / 1e3
}

pub fn solution_to_json(solution: &MultiFloorSolution, instance: &Instance) -> String {
    let b = &instance.building;
    let floors = solution
        .floors
        .iter()
        .enumerate()
        .map(|(f, rep)| {
            let t = b.floor(f);
            let part = solution.placement.floor_part(f);
            FloorDoc {
                floor: f,
                factor: rep.factor.to_string(),
                factor_value: rep.factor.value(),
                status: rep.status.as_str().into(),
                attempts: rep.attempts,
                cost: rep.cost,
                edge_rooms: part
                    .edge_rooms
                    .iter()
                    .map(|(slot, &count)| EdgeRoomsDoc {
                        group: instance.groups[slot.group].clone(),
                        size: instance.sizes[slot.size],
                        edge: t.edges[slot.edge].id.clone(),
                        count,
                    })
                    .collect(),
                corner_rooms: part
                    .corner_rooms
                    .iter()
                    .map(|r| CornerRoomDoc {
                        group: instance.groups[r.group].clone(),
                        size: instance.sizes[r.size],
                        corner: t.corners[r.corner].id.clone(),
                        edge: t.edges[r.edge].id.clone(),
                    })
                    .collect(),
            }
        })
        .collect();
    let doc = SolutionDoc {
        format: SOLUTION_FORMAT.into(),
        instance: instance.name.clone(),
        mode: solution.mode,
        status: solution.status.as_str().into(),
        cost: solution.cost,
        floors_scaled: solution.floors_scaled(),
        floors,
        floor_assignment: solution.fa.as_ref().map(|fa| FaDoc {
            method: fa.method.clone(),
            status: fa.status.as_str().into(),
            cost: fa.cost,
        }),
        provenance: ProvenanceDoc {
            backend: solution.backend.clone(),
            wall_time_s: round_ms(solution.wall_time),
            floor_times_s: solution.floors.iter().map(|f| round_ms(f.wall_time)).collect(),
            fa_time_s: solution.fa.as_ref().map(|fa| round_ms(fa.wall_time)),
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("solution documents always serialize");
    s.push('\n');
    s
}

/// Parses a solution against its instance. Stored costs are taken as
/// written; see [`crate::pipeline::evaluate`] for recomputation.
pub fn solution_from_json(text: &str, instance: &Instance) -> Result<MultiFloorSolution, IoError> {
    let doc: SolutionDoc = serde_json::from_str(text)?;
    check_format(&doc.format, SOLUTION_FORMAT)?;
    let b = &instance.building;
    if doc.floors.len() != b.num_floors() {
        return Err(IoError::Reference(format!(
            "solution has {} floors, instance `{}` has {}",
            doc.floors.len(),
            instance.name,
            b.num_floors()
        )));
    }
    let groups: BTreeMap<&str, usize> = instance.groups.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let group = |id: &str| groups.get(id).copied().ok_or_else(|| IoError::Reference(format!("unknown group `{id}`")));
    let size = |v: f64| {
        instance.sizes.iter().position(|&s| s == v).ok_or_else(|| IoError::Reference(format!("unknown room size {v}")))
    };
    let status = |s: &str| parse_status(s).ok_or_else(|| IoError::Reference(format!("unknown status `{s}`")));

    let mut placement = Placement::default();
    let mut floors = Vec::new();
    for (f, fd) in doc.floors.iter().enumerate() {
        if fd.floor != f {
            return Err(IoError::Reference(format!("floor entries out of order at {}", fd.floor)));
        }
        let t = b.floor(f);
        let edge = |id: &str| {
            t.edges.iter().position(|e| e.id == id).ok_or_else(|| IoError::Reference(format!("unknown edge `{id}`")))
        };
        let corner = |id: &str| {
            t.corners
                .iter()
                .position(|c| c.id == id)
                .ok_or_else(|| IoError::Reference(format!("unknown corner `{id}`")))
        };
        for r in &fd.edge_rooms {
            let slot = EdgeSlot { group: group(&r.group)?, size: size(r.size)?, floor: f, edge: edge(&r.edge)? };
            placement.add_edge_rooms(slot, r.count);
        }
        for r in &fd.corner_rooms {
            placement.corner_rooms.push(CornerRoom {
                group: group(&r.group)?,
                size: size(r.size)?,
                floor: f,
                corner: corner(&r.corner)?,
                edge: edge(&r.edge)?,
            });
        }
        let factor: Fraction = fd.factor.parse().map_err(IoError::Reference)?;
        if factor.num == 0 || factor.num > factor.den {
            return Err(IoError::Reference(format!("scaling factor {factor} outside (0, 1]")));
        }
        floors.push(FloorReport {
            factor,
            status: status(&fd.status)?,
            attempts: fd.attempts,
            wall_time: Duration::from_secs_f64(doc.provenance.floor_times_s.get(f).copied().unwrap_or(0.0).max(0.0)),
            cost: fd.cost,
        });
    }
    placement.corner_rooms.sort();
    let fa = match doc.floor_assignment {
        Some(fa) => Some(FaReport {
            method: fa.method,
            status: status(&fa.status)?,
            cost: fa.cost,
            wall_time: Duration::from_secs_f64(doc.provenance.fa_time_s.unwrap_or(0.0).max(0.0)),
        }),
        None => None,
    };
    Ok(MultiFloorSolution {
        mode: doc.mode,
        backend: doc.provenance.backend,
        placement,
        floors,
        cost: doc.cost,
        status: status(&doc.status)?,
        fa,
        wall_time: Duration::from_secs_f64(doc.provenance.wall_time_s.max(0.0)),
    })
}
