//! Derived features: urban areas for small scales and building blocks for
//! the agent engine.

mod blocks;
mod urban;

use thiserror::Error;

use crate::geom::GeomError;

pub use blocks::{build_blocks, Block, BlockId, DEFAULT_JOIN_DIST};
pub use urban::{delineate_urban_areas, urban_footprint, UrbanArea, UrbanParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnrichmentError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("invalid enrichment parameters: {0}")]
    InvalidParams(String),
}
