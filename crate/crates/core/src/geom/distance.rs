use super::types::segments_intersect;
use super::{MultiPolygon, Point, Polygon, Ring};

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

pub fn point_ring_distance(p: Point, r: &Ring) -> f64 {
    r.edges()
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

fn boundary_distance(a: &Polygon, b: &Polygon) -> f64 {
    let mut best = f64::INFINITY;
    for ra in a.rings() {
        for (p, q) in ra.edges() {
            for rb in b.rings() {
                for (s, t) in rb.edges() {
                    best = best.min(segment_distance(p, q, s, t));
                    if best == 0.0 {
                        return 0.0;
                    }
                }
            }
        }
    }
    best
}

/// Whether the closed polygons share any point.
pub fn polygons_intersect(a: &Polygon, b: &Polygon) -> bool {
    if !a.bbox().intersects(&b.bbox()) {
        return false;
    }
    if boundary_distance(a, b) == 0.0 {
        return true;
    }
    a.contains_point(b.exterior().vertices()[0]) || b.contains_point(a.exterior().vertices()[0])
}

/// Zero when the polygons touch or overlap, else the smallest distance
/// between their boundaries.
pub fn min_separation(a: &Polygon, b: &Polygon) -> f64 {
    let d = boundary_distance(a, b);
    if d == 0.0 {
        return 0.0;
    }
    // Disjoint boundaries: either nested (overlapping interiors) or apart.
    if a.contains_point(b.exterior().vertices()[0]) || b.contains_point(a.exterior().vertices()[0]) {
        return 0.0;
    }
    d
}

/// Points along every ring, with each edge split into at most `splits` pieces.
fn boundary_samples<'a>(rings: impl IntoIterator<Item = &'a Ring>, splits: usize) -> Vec<Point> {
    let mut out = Vec::new();
    for r in rings {
        for (a, b) in r.edges() {
            for k in 0..splits {
                out.push(a.lerp(b, k as f64 / splits as f64));
            }
        }
    }
    out
}

fn directed_hausdorff(a: &[&Ring], b: &[&Ring], splits: usize) -> f64 {
    boundary_samples(a.iter().copied(), splits)
        .into_iter()
        .map(|p| b.iter().map(|r| point_ring_distance(p, r)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn symmetric_hausdorff(a: &[&Ring], b: &[&Ring]) -> f64 {
    // Samples interpolated along an edge are not exactly on it in floating point.
    if a == b {
        return 0.0;
    }
    directed_hausdorff(a, b, SPLITS).max(directed_hausdorff(b, a, SPLITS))
}

const SPLITS: usize = 8;

/// Symmetric Hausdorff distance between polygon boundaries, evaluated at the
/// vertices and at evenly spaced points along each edge.
pub fn hausdorff_distance(a: &Polygon, b: &Polygon) -> f64 {
    symmetric_hausdorff(&a.rings().collect::<Vec<_>>(), &b.rings().collect::<Vec<_>>())
}

/// [`hausdorff_distance`] over all rings of two multipolygons. Infinite if
/// exactly one side is empty.
pub fn multi_hausdorff_distance(a: &MultiPolygon, b: &MultiPolygon) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (false, false) => symmetric_hausdorff(&a.rings().collect::<Vec<_>>(), &b.rings().collect::<Vec<_>>()),
        _ => f64::INFINITY,
    }
}
