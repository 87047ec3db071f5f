pub mod fa;
pub mod fp;
pub mod heuristic;
pub mod instances;
pub mod io;
pub mod milp;
pub mod model;
pub mod pipeline;
pub mod render;
