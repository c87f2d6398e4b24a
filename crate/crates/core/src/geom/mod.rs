//! Planar polygon kernel in projected meters.

mod boolean;
mod buffer;
mod distance;
mod hull;
mod simplify;
mod types;

use thiserror::Error;

pub use boolean::{boolean_union, difference, intersection, symmetric_difference_area};
pub(crate) use boolean::{repair_ring, union_unchecked};
pub use buffer::{arc_tolerance, disc, signed_buffer, DEFAULT_ARC_SEGMENTS};
pub(crate) use buffer::buffer_unchecked;
pub use distance::{
    hausdorff_distance, min_separation, multi_hausdorff_distance, point_ring_distance, point_segment_distance,
    polygons_intersect, segment_distance,
};
pub use hull::{convex_hull, hull_points, min_bounding_rectangle, MbrResult};
pub use simplify::{simplify_ring, smooth_ring, MAX_SMOOTH_ITERATIONS};
pub use types::{Bbox, MultiPolygon, Point, Polygon, Ring, DEGENERATE_AREA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("ring has {0} vertices, need at least 3")]
    TooFewVertices(usize),
    #[error("ring has zero area")]
    ZeroArea,
    #[error("ring self-intersects at edges {edge_a} and {edge_b}")]
    SelfIntersection { edge_a: usize, edge_b: usize },
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
    #[error("hole {0} is not strictly inside the exterior ring")]
    HoleOutsideShell(usize),
    #[error("holes {0} and {1} overlap")]
    OverlappingHoles(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Shoelace area of a polygon: exterior minus holes.
pub fn area(p: &Polygon) -> Result<f64, GeomError> {
    for r in p.rings() {
        r.validate()?;
    }
    Ok(p.area())
}
