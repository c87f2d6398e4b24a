//! Building merging by morphological closure then opening, followed by
//! short-edge removal.

mod edges;
mod raster;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::building::{footprints, Building};
use crate::geom::{
    buffer_unchecked, polygons_intersect, union_unchecked, GeomError, MultiPolygon, Polygon,
    DEFAULT_ARC_SEGMENTS,
};

pub use edges::{remove_short_edges, MIN_RING_VERTICES};
pub use raster::{rasterize_scene, raster_morphology_oracle, RasterGrid, MAX_CELLS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorphologyError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("invalid merge parameters: {0}")]
    InvalidParams(String),
    #[error("raster of {width}x{height} cells exceeds the {max}-cell budget")]
    Capacity { width: usize, height: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MergeParams {
    /// Radius of the dilation/erosion disc, meters.
    pub buffer_size: f64,
    /// Edges shorter than this are removed after the morphology, meters.
    pub min_edge_length: f64,
    pub arc_segments: usize,
    /// Output parts smaller than this are dropped (0 disables).
    pub min_result_area: f64,
    /// Keep closure components at least this large that the opening
    /// removes entirely. `None` reproduces the plain operator.
    pub keep_lost_min_area: Option<f64>,
}

impl Default for MergeParams {
    fn default() -> Self {
        MergeParams::os10k()
    }
}

impl MergeParams {
    pub fn new(buffer_size: f64, min_edge_length: f64) -> MergeParams {
        MergeParams {
            buffer_size,
            min_edge_length,
            arc_segments: DEFAULT_ARC_SEGMENTS,
            min_result_area: 0.0,
            keep_lost_min_area: None,
        }
    }

    /// Ordnance Survey 1:10K source: 7 m buffer, 1 m edges.
    pub fn os10k() -> MergeParams {
        MergeParams::new(7.0, 1.0)
    }

    /// Survey of India 1:10K source: 6 m buffer, 1 m edges.
    pub fn soi10k() -> MergeParams {
        MergeParams::new(6.0, 1.0)
    }

    pub fn preset(name: &str) -> Option<MergeParams> {
        match name {
            "os10k" => Some(MergeParams::os10k()),
            "soi10k" => Some(MergeParams::soi10k()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), MorphologyError> {
        if !(self.buffer_size > 0.0) || !self.buffer_size.is_finite() {
            return Err(MorphologyError::InvalidParams(format!(
                "buffer_size must be positive, got {}",
                self.buffer_size
            )));
        }
        if !(self.min_edge_length >= 0.0) || !self.min_edge_length.is_finite() {
            return Err(MorphologyError::InvalidParams(format!(
                "min_edge_length must be non-negative, got {}",
                self.min_edge_length
            )));
        }
        if self.arc_segments < 4 {
            return Err(MorphologyError::InvalidParams(format!(
                "arc_segments must be at least 4, got {}",
                self.arc_segments
            )));
        }
        if self.keep_lost_min_area.is_some_and(|a| !(a >= 0.0)) {
            return Err(MorphologyError::InvalidParams("keep_lost_min_area must be non-negative".into()));
        }
        if !(self.min_result_area >= 0.0) {
            return Err(MorphologyError::InvalidParams("min_result_area must be non-negative".into()));
        }
        if self.min_edge_length >= self.buffer_size {
            log::warn!(
                "edge length {} is not smaller than buffer size {}",
                self.min_edge_length,
                self.buffer_size
            );
        }
        Ok(())
    }
}

fn check_radius(r: f64, arcs: usize) -> Result<(), MorphologyError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(MorphologyError::InvalidParams(format!("radius must be positive, got {r}")));
    }
    if arcs < 4 {
        return Err(MorphologyError::InvalidParams(format!("arc_segments must be at least 4, got {arcs}")));
    }
    Ok(())
}

fn validated_union(g: &MultiPolygon) -> Result<MultiPolygon, MorphologyError> {
    for p in g.parts() {
        for r in p.rings() {
            r.validate()?;
        }
    }
    Ok(union_unchecked(g.parts()))
}

/// Dilation then erosion by `r`. Fuses parts closer than `2r`.
pub fn closure(g: &MultiPolygon, r: f64, arcs: usize) -> Result<MultiPolygon, MorphologyError> {
    check_radius(r, arcs)?;
    let g = validated_union(g)?;
    Ok(buffer_unchecked(&buffer_unchecked(&g, r, arcs), -r, arcs))
}

/// Erosion then dilation by `r`. Removes anything narrower than `2r`.
pub fn opening(g: &MultiPolygon, r: f64, arcs: usize) -> Result<MultiPolygon, MorphologyError> {
    check_radius(r, arcs)?;
    let g = validated_union(g)?;
    Ok(buffer_unchecked(&buffer_unchecked(&g, -r, arcs), r, arcs))
}

/// Drops holes smaller than `min_area`.
pub fn fill_small_holes(g: &MultiPolygon, min_area: f64) -> MultiPolygon {
    g.parts()
        .iter()
        .map(|p| p.with_holes(p.holes().iter().filter(|h| h.area() >= min_area).cloned().collect()))
        .collect()
}

/// Closure with courtyard filling, and the opening of that.
fn stages(buildings: &[Building], params: &MergeParams) -> Result<(MultiPolygon, MultiPolygon), MorphologyError> {
    params.validate()?;
    if buildings.is_empty() {
        return Ok((MultiPolygon::empty(), MultiPolygon::empty()));
    }
    let r = params.buffer_size;
    let arcs = params.arc_segments;
    let union = union_unchecked(footprints(buildings).parts());
    let closed = buffer_unchecked(&buffer_unchecked(&union, r, arcs), -r, arcs);
    let closed = fill_small_holes(&closed, PI * r * r);
    let opened = buffer_unchecked(&buffer_unchecked(&closed, -r, arcs), r, arcs);
    Ok((closed, opened.sorted()))
}

/// Morphological core of the merge: union, closure, courtyard filling and
/// opening, before any edge simplification.
pub fn merge_core(buildings: &[Building], params: &MergeParams) -> Result<MultiPolygon, MorphologyError> {
    Ok(stages(buildings, params)?.1)
}

/// Full merge: [`merge_core`] then [`remove_short_edges`] on every part.
/// Parts that would touch a neighbour after simplification keep their
/// unsimplified outline, so output parts stay disjoint.
///
/// With `keep_lost_min_area` set, closure components that the opening
/// erases entirely are kept when at least that large.
pub fn merge_buildings(buildings: &[Building], params: &MergeParams) -> Result<MultiPolygon, MorphologyError> {
    let (closed, opened) = stages(buildings, params)?;
    let mut core: Vec<Polygon> = opened.into_parts();
    if let Some(min_area) = params.keep_lost_min_area {
        let lost: Vec<Polygon> = closed
            .parts()
            .iter()
            .filter(|c| c.area() >= min_area && !core.iter().any(|o| polygons_intersect(o, c)))
            .cloned()
            .collect();
        if !lost.is_empty() {
            log::debug!("keeping {} closure components erased by the opening", lost.len());
        }
        core.extend(lost);
    }
    let simplified: Vec<Polygon> = core.iter().map(|p| remove_short_edges(p, params.min_edge_length)).collect();
    let mut parts = simplified.clone();
    for i in 0..simplified.len() {
        for j in i + 1..simplified.len() {
            if polygons_intersect(&simplified[i], &simplified[j]) {
                parts[i] = core[i].clone();
                parts[j] = core[j].clone();
            }
        }
    }
    let parts: Vec<Polygon> = parts.into_iter().filter(|p| p.area() >= params.min_result_area).collect();
    Ok(MultiPolygon::new(parts).sorted())
}
