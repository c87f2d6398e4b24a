use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EnrichmentError;
use crate::building::{footprints, Building};
use crate::geom::{
    buffer_unchecked, polygons_intersect, simplify_ring, smooth_ring, union_unchecked, MultiPolygon,
    Point, Polygon, Ring, DEFAULT_ARC_SEGMENTS, MAX_SMOOTH_ITERATIONS,
};
use crate::morphology::fill_small_holes;

/// Longest edge piece fed to the smoother, as a fraction of `dilate_dist`.
/// Chaikin moves a corner by at most a quarter of its adjacent pieces, so
/// smoothing shifts the boundary by at most `0.1 * dilate_dist`.
const SMOOTH_SPAN: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UrbanParams {
    pub dilate_dist: f64,
    pub erode_dist: f64,
    /// Smallest town kept, m².
    pub min_town_area: f64,
    pub boundary_simplify_tol: f64,
    pub smooth_iterations: usize,
    pub arc_segments: usize,
}

impl Default for UrbanParams {
    fn default() -> Self {
        UrbanParams {
            dilate_dist: 25.0,
            erode_dist: 10.0,
            min_town_area: 750_000.0,
            boundary_simplify_tol: 25.0,
            smooth_iterations: 1,
            arc_segments: DEFAULT_ARC_SEGMENTS,
        }
    }
}

impl UrbanParams {
    pub fn validate(&self) -> Result<(), EnrichmentError> {
        let bad = |m: String| Err(EnrichmentError::InvalidParams(m));
        if !(self.erode_dist >= 0.0) || !(self.dilate_dist > self.erode_dist) || !self.dilate_dist.is_finite() {
            return bad(format!(
                "need dilate_dist > erode_dist >= 0, got {} and {}",
                self.dilate_dist, self.erode_dist
            ));
        }
        if !(self.min_town_area > 0.0) || !self.min_town_area.is_finite() {
            return bad(format!("min_town_area must be positive, got {}", self.min_town_area));
        }
        if !(self.boundary_simplify_tol >= 0.0) {
            return bad(format!("boundary_simplify_tol must be non-negative, got {}", self.boundary_simplify_tol));
        }
        if self.smooth_iterations > MAX_SMOOTH_ITERATIONS {
            return bad(format!("smooth_iterations must be at most {MAX_SMOOTH_ITERATIONS}"));
        }
        if self.arc_segments < 4 {
            return bad(format!("arc_segments must be at least 4, got {}", self.arc_segments));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrbanArea {
    pub id: u64,
    pub footprint: Polygon,
    pub area: f64,
    pub building_count: usize,
}

/// Settlement envelope before the size threshold: dilation, erosion and
/// filling of holes smaller than a tenth of the minimum town.
pub fn urban_footprint(buildings: &[Building], params: &UrbanParams) -> Result<MultiPolygon, EnrichmentError> {
    params.validate()?;
    let union = union_unchecked(footprints(buildings).parts());
    let grown = buffer_unchecked(&union, params.dilate_dist, params.arc_segments);
    let shrunk = buffer_unchecked(&grown, -params.erode_dist, params.arc_segments);
    Ok(fill_small_holes(&shrunk, params.min_town_area / 10.0).sorted())
}

fn map_rings(p: &Polygon, f: impl Fn(&Ring) -> Ring) -> Option<Polygon> {
    let exterior = f(p.exterior());
    let holes = p.holes().iter().map(&f).collect();
    Polygon::new(exterior, holes).ok()
}

/// Splits every edge into equal pieces no longer than `max_len`.
fn densify(r: &Ring, max_len: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for (a, b) in r.edges() {
        let k = (a.dist(b) / max_len).ceil().max(1.0) as usize;
        out.extend((0..k).map(|i| a.lerp(b, i as f64 / k as f64)));
    }
    out
}

fn drop_straight(v: Vec<Point>) -> Vec<Point> {
    let straight = |a: Point, b: Point, c: Point| {
        let (u, w) = (b.sub(a), c.sub(b));
        u.cross(w).abs() <= 1e-9 * u.norm() * w.norm() && u.dot(w) > 0.0
    };
    let mut out: Vec<Point> = Vec::with_capacity(v.len());
    for p in v {
        while out.len() >= 2 && straight(out[out.len() - 2], out[out.len() - 1], p) {
            out.pop();
        }
        out.push(p);
    }
    while out.len() > 3 && straight(out[out.len() - 2], out[out.len() - 1], out[0]) {
        out.pop();
    }
    while out.len() > 3 && straight(out[out.len() - 1], out[0], out[1]) {
        out.remove(0);
    }
    out
}

/// Chaikin smoothing confined to corners: edges are first cut into pieces no
/// longer than `span`, so no corner moves by more than `span / 4`. Straight
/// runs are merged back afterwards.
fn smooth_corners(r: &Ring, iterations: usize, span: f64) -> Ring {
    if iterations == 0 {
        return r.clone();
    }
    let dense = Ring::from_raw(densify(r, span));
    let smoothed = smooth_ring(&dense, iterations);
    Ring::from_raw(drop_straight(smoothed.into_vertices()))
}

/// Simplified and smoothed outline. Steps that would break validity or push
/// the area under the threshold are skipped.
fn refine(p: &Polygon, params: &UrbanParams) -> Polygon {
    let tol = params.boundary_simplify_tol;
    let it = params.smooth_iterations;
    let span = SMOOTH_SPAN * params.dilate_dist;
    let keeps = |q: &Polygon| q.area() >= params.min_town_area;
    let simplified = map_rings(p, |r| simplify_ring(r, tol)).filter(keeps);
    let base = simplified.unwrap_or_else(|| p.clone());
    match map_rings(&base, |r| smooth_corners(r, it, span)).filter(keeps) {
        Some(s) => s,
        None => {
            log::debug!("smoothing dropped an urban area below threshold; keeping the unsmoothed outline");
            base
        }
    }
}

/// Urban areas: [`urban_footprint`], then parts at least `min_town_area`
/// large, simplified and smoothed. Ids follow centroid order.
pub fn delineate_urban_areas(buildings: &[Building], params: &UrbanParams) -> Result<Vec<UrbanArea>, EnrichmentError> {
    if buildings.is_empty() {
        params.validate()?;
        return Ok(Vec::new());
    }
    let envelope = urban_footprint(buildings, params)?;
    let towns: Vec<&Polygon> = envelope.parts().iter().filter(|p| p.area() >= params.min_town_area).collect();
    log::info!("{} of {} settlement parts reach {} m²", towns.len(), envelope.len(), params.min_town_area);
    let refined: Vec<Polygon> = towns.par_iter().map(|p| refine(p, params)).collect();
    Ok(refined
        .into_iter()
        .enumerate()
        .map(|(i, footprint)| {
            let building_count = buildings.iter().filter(|b| polygons_intersect(b.footprint(), &footprint)).count();
            UrbanArea { id: i as u64 + 1, area: footprint.area(), footprint, building_count }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_params() {
        let mut p = UrbanParams::default();
        p.erode_dist = 30.0;
        assert!(p.validate().is_err());
        let mut p = UrbanParams::default();
        p.min_town_area = 0.0;
        assert!(p.validate().is_err());
        assert!(UrbanParams::default().validate().is_ok());
    }

    #[test]
    fn corner_smoothing_is_local() {
        let sq = Polygon::rect(0.0, 0.0, 100.0, 100.0).unwrap();
        let r = smooth_corners(sq.exterior(), 1, 10.0);
        // Four straight runs plus one cut per corner.
        assert_eq!(r.len(), 8);
        assert!((r.area() - (10_000.0 - 4.0 * 0.5 * 2.5 * 2.5)).abs() < 1e-9);
        assert_eq!(&smooth_corners(sq.exterior(), 0, 10.0), sq.exterior());
    }

    #[test]
    fn drop_straight_wraps() {
        let v = vec![
            Point::new(5.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(0.0, 10.0),
            Point::new(0.0, 0.0),
        ];
        assert_eq!(drop_straight(v).len(), 4);
    }

    #[test]
    fn single_building_is_not_a_town() {
        let b = Building::new(1, Polygon::rect(0.0, 0.0, 20.0, 20.0).unwrap()).unwrap();
        assert!(delineate_urban_areas(&[b], &UrbanParams::default()).unwrap().is_empty());
        assert!(delineate_urban_areas(&[], &UrbanParams::default()).unwrap().is_empty());
    }
}
