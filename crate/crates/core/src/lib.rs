//! Building generalization toolkit.

pub mod agent;
pub mod building;
pub mod enrichment;
pub mod geom;
pub mod io;
pub mod morphology;
pub mod pipeline;
pub mod shape;

pub use building::{Building, BuildingId};
