use serde::{Deserialize, Serialize};

use crate::geom::{GeomError, MultiPolygon, Polygon};
use crate::shape::{measure_shape, ShapeMeasures};

pub type BuildingId = u64;

/// A building footprint with its shape measures computed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    id: BuildingId,
    footprint: Polygon,
    measures: ShapeMeasures,
}

impl Building {
    pub fn new(id: BuildingId, footprint: Polygon) -> Result<Building, GeomError> {
        let measures = measure_shape(&footprint)?;
        Ok(Building { id, footprint, measures })
    }

    pub fn id(&self) -> BuildingId {
        self.id
    }

    pub fn footprint(&self) -> &Polygon {
        &self.footprint
    }

    pub fn measures(&self) -> &ShapeMeasures {
        &self.measures
    }

    pub fn area(&self) -> f64 {
        self.measures.area
    }

    /// Same id, new geometry.
    pub fn with_footprint(&self, footprint: Polygon) -> Result<Building, GeomError> {
        Building::new(self.id, footprint)
    }
}

pub fn footprints(buildings: &[Building]) -> MultiPolygon {
    buildings.iter().map(|b| b.footprint().clone()).collect()
}
