//! GeoJSON exchange, SVG rendering and feature-set comparison.

mod geojson;
mod metrics;
mod svg;

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::building::{Building, BuildingId};
use crate::geom::{GeomError, MultiPolygon};

pub use self::geojson::{read_geojson, to_geojson_string, write_geojson, Ingest};
pub use metrics::{compare_metrics, MatchRow, MetricsReport};
pub use svg::{render_svg, to_svg_string, LayerStyle};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed GeoJSON in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path} has features but none are polygons")]
    NoPolygons { path: PathBuf },
    #[error("duplicate feature id {0}")]
    DuplicateId(u64),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("nothing to render: layers have an empty envelope")]
    EmptyEnvelope,
    #[error("metrics are undefined when both feature sets are empty")]
    UndefinedMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub id: u64,
    pub geometry: MultiPolygon,
    pub properties: Map<String, Value>,
}

/// A named layer of polygonal features with unique ids.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureSet {
    pub layer: String,
    pub features: Vec<Feature>,
}

impl FeatureSet {
    pub fn new(layer: impl Into<String>, features: Vec<Feature>) -> Result<FeatureSet, IoError> {
        let mut seen = BTreeSet::new();
        for f in &features {
            if !seen.insert(f.id) {
                return Err(IoError::DuplicateId(f.id));
            }
        }
        Ok(FeatureSet { layer: layer.into(), features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn from_buildings(layer: impl Into<String>, bs: &[Building]) -> FeatureSet {
        let features = bs
            .iter()
            .map(|b| Feature { id: b.id(), geometry: b.footprint().clone().into(), properties: Map::new() })
            .collect();
        FeatureSet { layer: layer.into(), features }
    }

    /// Every polygon becomes a building. Single-part features keep their id;
    /// parts of multi-part features get fresh ids above the largest one.
    pub fn to_buildings(&self) -> Result<Vec<Building>, IoError> {
        let mut next: BuildingId = self.features.iter().map(|f| f.id).max().unwrap_or(0) + 1;
        let mut out = Vec::new();
        for f in &self.features {
            if f.geometry.len() == 1 {
                out.push(Building::new(f.id, f.geometry.parts()[0].clone())?);
                continue;
            }
            for p in f.geometry.parts() {
                out.push(Building::new(next, p.clone())?);
                next += 1;
            }
        }
        out.sort_by_key(Building::id);
        Ok(out)
    }

    /// Union of all feature geometries as one multipolygon.
    pub fn geometry(&self) -> MultiPolygon {
        self.features.iter().flat_map(|f| f.geometry.parts().iter().cloned()).collect()
    }
}
