//! Floor plans, room demands, placements and their costs.

mod cost;
mod distance;
mod instance;
mod placement;
mod template;

pub use cost::{fa_cost, proximity_cost};
pub use distance::{build_object_distances, DistanceMatrix, GlobalObject};
pub use instance::{Building, FloorDistance, Instance, Params, RoomDemand};
pub use placement::{
    validate_placement, CornerRoom, EdgeSlot, FloorAssignment, Placement, ValidationReport, Violation,
};
pub use template::{corner_fit, Corner, Edge, EdgeGeometry, FloorPlanTemplate, Geometry, ObjectRef, Rect, Side};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("template {id}: {msg}")]
    Template { id: String, msg: String },
    #[error("template {0} has no stairs distance row")]
    MissingStairs(String),
    #[error("{0}")]
    Invalid(String),
    #[error("unknown {kind} index {index}")]
    Unknown { kind: &'static str, index: usize },
}
