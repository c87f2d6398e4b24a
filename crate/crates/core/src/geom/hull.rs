use serde::{Deserialize, Serialize};

use super::{GeomError, Point, Polygon, Ring};

/// Andrew's monotone chain. Returns the hull counter-clockwise without
/// collinear points; fewer than 3 points when the input is degenerate.
pub fn hull_points(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| a.sub(o).cross(b.sub(o));
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn convex_hull(p: &Polygon) -> Polygon {
    let hull = hull_points(p.exterior().vertices());
    Polygon::from_rings_unchecked(Ring::from_raw(hull), Vec::new())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbrResult {
    /// Orientation of the long side, degrees in [0, 180).
    pub angle: f64,
    pub width: f64,
    pub height: f64,
    pub rect: Polygon,
}

impl MbrResult {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Extent of `pts` projected on the unit direction `u` and its normal.
fn extents(pts: &[Point], u: Point) -> (f64, f64, f64, f64) {
    let n = Point::new(-u.y, u.x);
    let (mut lo_u, mut hi_u, mut lo_n, mut hi_n) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        let a = p.dot(u);
        let b = p.dot(n);
        lo_u = lo_u.min(a);
        hi_u = hi_u.max(a);
        lo_n = lo_n.min(b);
        hi_n = hi_n.max(b);
    }
    (lo_u, hi_u, lo_n, hi_n)
}

fn normalize_deg(a: f64) -> f64 {
    let mut d = a.to_degrees().rem_euclid(180.0);
    if d >= 180.0 - 1e-9 {
        d = 0.0;
    }
    d
}

/// Minimum-area enclosing rectangle. The optimum is flush with one hull
/// edge, so every hull edge direction is tried.
pub fn min_bounding_rectangle(p: &Polygon) -> Result<MbrResult, GeomError> {
    if p.area() < super::types::DEGENERATE_AREA {
        return Err(GeomError::ZeroArea);
    }
    let hull = hull_points(p.exterior().vertices());
    if hull.len() < 3 {
        return Err(GeomError::ZeroArea);
    }
    // Work relative to the first hull vertex for precision.
    let origin = hull[0];
    let local: Vec<Point> = hull.iter().map(|q| q.sub(origin)).collect();
    let n = local.len();
    let mut best: Option<(f64, Point, (f64, f64, f64, f64))> = None;
    for i in 0..n {
        let e = local[(i + 1) % n].sub(local[i]);
        let len = e.norm();
        if len == 0.0 {
            continue;
        }
        let u = e.scale(1.0 / len);
        let ext = extents(&local, u);
        let area = (ext.1 - ext.0) * (ext.3 - ext.2);
        let better = match &best {
            None => true,
            Some((a, bu, _)) => {
                if area < a * (1.0 - 1e-12) {
                    true
                } else if area <= a * (1.0 + 1e-12) {
                    // Tie: prefer the smaller normalized orientation.
                    normalize_deg(u.y.atan2(u.x)) < normalize_deg(bu.y.atan2(bu.x)) - 1e-9
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((area, u, ext));
        }
    }
    let (_, u, (lo_u, hi_u, lo_n, hi_n)) = best.ok_or(GeomError::ZeroArea)?;
    let nrm = Point::new(-u.y, u.x);
    let corner = |a: f64, b: f64| origin.add(u.scale(a)).add(nrm.scale(b));
    let rect = Polygon::from_rings_unchecked(
        Ring::from_raw(vec![
            corner(lo_u, lo_n),
            corner(hi_u, lo_n),
            corner(hi_u, hi_n),
            corner(lo_u, hi_n),
        ]),
        Vec::new(),
    );
    let side_u = hi_u - lo_u;
    let side_n = hi_n - lo_n;
    let angle_u = normalize_deg(u.y.atan2(u.x));
    let angle_n = normalize_deg(nrm.y.atan2(nrm.x));
    let rel = (side_u - side_n).abs() / side_u.max(side_n);
    let (width, height, angle) = if rel <= 1e-9 {
        (side_u, side_n, angle_u.min(angle_n))
    } else if side_u > side_n {
        (side_u, side_n, angle_u)
    } else {
        (side_n, side_u, angle_n)
    };
    Ok(MbrResult { angle, width, height, rect })
}
