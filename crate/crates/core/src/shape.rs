use serde::{Deserialize, Serialize};

use crate::geom::{convex_hull, min_bounding_rectangle, GeomError, Polygon};

/// Shape descriptors consumed by the building constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeMeasures {
    pub area: f64,
    pub shortest_edge: f64,
    /// Mean deviation (degrees) of corner angles from the nearest of 90° or 45°.
    pub squareness_dev: f64,
    /// Area over convex-hull area.
    pub convexity: f64,
    /// MBR short side over long side.
    pub elongation: f64,
}

/// Angle in [0°, 90°] between the two lines meeting at `b`. `None` for
/// straight-through (collinear) vertices, which carry no corner.
pub(crate) fn corner_line_angle(a: crate::geom::Point, b: crate::geom::Point, c: crate::geom::Point) -> Option<f64> {
    let u = a.sub(b);
    let w = c.sub(b);
    let (lu, lw) = (u.norm(), w.norm());
    if lu == 0.0 || lw == 0.0 {
        return None;
    }
    let cos = (u.dot(w) / (lu * lw)).clamp(-1.0, 1.0);
    let sin = u.cross(w) / (lu * lw);
    if sin.abs() < 1e-12 && cos < 0.0 {
        return None;
    }
    Some(cos.abs().acos().to_degrees())
}

pub(crate) fn squareness_deviation(p: &Polygon) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for ring in p.rings() {
        let v = ring.vertices();
        let n = v.len();
        for i in 0..n {
            if let Some(theta) = corner_line_angle(v[(i + n - 1) % n], v[i], v[(i + 1) % n]) {
                sum += (theta - 90.0).abs().min((theta - 45.0).abs());
                count += 1;
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn measure_shape(p: &Polygon) -> Result<ShapeMeasures, GeomError> {
    for r in p.rings() {
        r.validate()?;
    }
    let area = p.area();
    if area < crate::geom::DEGENERATE_AREA {
        return Err(GeomError::ZeroArea);
    }
    let hull_area = convex_hull(p).area();
    let mbr = min_bounding_rectangle(p)?;
    Ok(ShapeMeasures {
        area,
        shortest_edge: p.shortest_edge(),
        squareness_dev: squareness_deviation(p),
        convexity: (area / hull_area).min(1.0),
        elongation: (mbr.height / mbr.width).min(1.0),
    })
}
