use serde::{Deserialize, Serialize};

use super::EnrichmentError;
use crate::building::{footprints, Building, BuildingId};
use crate::geom::{buffer_unchecked, intersection, union_unchecked, MultiPolygon, Polygon, DEFAULT_ARC_SEGMENTS};

pub type BlockId = u64;

pub const DEFAULT_JOIN_DIST: f64 = 15.0;

/// Group of nearby buildings handled together by the meso agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: BlockId,
    pub footprint: Polygon,
    /// Ascending.
    pub building_ids: Vec<BuildingId>,
}

impl Block {
    pub fn area(&self) -> f64 {
        self.footprint.area()
    }

    /// Member buildings, in id order, looked up in `all`.
    pub fn members<'a>(&self, all: &'a [Building]) -> Vec<&'a Building> {
        let mut out: Vec<&Building> = all.iter().filter(|b| self.building_ids.binary_search(&b.id()).is_ok()).collect();
        out.sort_by_key(|b| b.id());
        out
    }
}

fn owner(b: &Building, parts: &[Polygon]) -> usize {
    let c = b.footprint().centroid();
    if let Some(i) = parts.iter().position(|p| p.contains_point(c)) {
        return i;
    }
    // Centroid outside every part (e.g. a U-shaped building): largest overlap.
    let single: MultiPolygon = b.footprint().clone().into();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, p) in parts.iter().enumerate() {
        let a = intersection(&single, &p.clone().into()).area();
        if a > best.1 {
            best = (i, a);
        }
    }
    best.0
}

/// Blocks are the connected parts of the closure of all footprints by
/// `join_dist`; each building goes to the part holding its centroid.
/// Block ids follow part centroid order.
pub fn build_blocks(buildings: &[Building], join_dist: f64) -> Result<Vec<Block>, EnrichmentError> {
    if !(join_dist > 0.0) || !join_dist.is_finite() {
        return Err(EnrichmentError::InvalidParams(format!("join_dist must be positive, got {join_dist}")));
    }
    if buildings.is_empty() {
        return Ok(Vec::new());
    }
    let union = union_unchecked(footprints(buildings).parts());
    let grown = buffer_unchecked(&union, join_dist, DEFAULT_ARC_SEGMENTS);
    let closed = buffer_unchecked(&grown, -join_dist, DEFAULT_ARC_SEGMENTS).sorted();
    let parts = closed.into_parts();

    let mut members: Vec<Vec<BuildingId>> = vec![Vec::new(); parts.len()];
    for b in buildings {
        members[owner(b, &parts)].push(b.id());
    }
    let mut out = Vec::with_capacity(parts.len());
    for (footprint, mut ids) in parts.into_iter().zip(members) {
        if ids.is_empty() {
            continue;
        }
        ids.sort_unstable();
        out.push(Block { id: out.len() as BlockId + 1, footprint, building_ids: ids });
    }
    Ok(out)
}
