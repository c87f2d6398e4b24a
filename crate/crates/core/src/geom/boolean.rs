//! Boolean set operations, backed by `geo`'s overlay engine.

use geo::BooleanOps;

use super::types::DEGENERATE_AREA;
use super::{GeomError, MultiPolygon, Point, Polygon, Ring};

fn ring_to_geo(r: &Ring) -> geo::LineString<f64> {
    let mut coords: Vec<geo::Coord<f64>> =
        r.vertices().iter().map(|p| geo::Coord { x: p.x, y: p.y }).collect();
    coords.push(coords[0]);
    geo::LineString::new(coords)
}

pub(crate) fn polygon_to_geo(p: &Polygon) -> geo::Polygon<f64> {
    geo::Polygon::new(
        ring_to_geo(p.exterior()),
        p.holes().iter().map(ring_to_geo).collect(),
    )
}

pub(crate) fn to_geo(mp: &MultiPolygon) -> geo::MultiPolygon<f64> {
    geo::MultiPolygon::new(mp.parts().iter().map(polygon_to_geo).collect())
}

fn ring_from_geo(ls: &geo::LineString<f64>) -> Option<Ring> {
    let ring = Ring::from_raw(ls.coords().map(|c| Point::new(c.x, c.y)).collect());
    let ring = drop_collinear(ring);
    (ring.len() >= 3 && ring.area() >= DEGENERATE_AREA).then_some(ring)
}

/// Removes vertices lying exactly on the line through their neighbours.
pub(crate) fn drop_collinear(ring: Ring) -> Ring {
    let mut v = ring.into_vertices();
    let mut changed = true;
    while changed && v.len() > 3 {
        changed = false;
        let n = v.len();
        for i in 0..n {
            let a = v[(i + n - 1) % n];
            let b = v[i];
            let c = v[(i + 1) % n];
            let cr = b.sub(a).cross(c.sub(b));
            let scale = b.sub(a).norm() * c.sub(b).norm();
            if cr.abs() <= 1e-12 * scale.max(1e-300) && b.sub(a).dot(c.sub(b)) >= 0.0 {
                v.remove(i);
                changed = true;
                break;
            }
        }
    }
    Ring::from_raw(v)
}

pub(crate) fn from_geo(mp: &geo::MultiPolygon<f64>) -> MultiPolygon {
    let parts = mp
        .iter()
        .filter_map(|p| {
            let ext = ring_from_geo(p.exterior())?;
            let holes = p.interiors().iter().filter_map(ring_from_geo).collect();
            Some(Polygon::from_rings_unchecked(ext, holes))
        })
        .filter(|p| p.area() >= DEGENERATE_AREA)
        .collect();
    MultiPolygon::new(parts)
}

pub(crate) fn validate_multi(mp: &MultiPolygon) -> Result<(), GeomError> {
    for p in mp.parts() {
        for r in p.rings() {
            r.validate()?;
        }
    }
    Ok(())
}

/// Union of all inputs. Overlapping or touching parts fuse; the result has
/// pairwise disjoint parts in canonical (centroid) order.
pub fn boolean_union(gs: &[MultiPolygon]) -> Result<MultiPolygon, GeomError> {
    for g in gs {
        validate_multi(g)?;
    }
    Ok(union_unchecked(gs.iter().flat_map(|g| g.parts().iter())))
}

pub(crate) fn union_unchecked<'a>(polys: impl IntoIterator<Item = &'a Polygon>) -> MultiPolygon {
    let geo_polys: Vec<geo::Polygon<f64>> = polys.into_iter().map(polygon_to_geo).collect();
    if geo_polys.is_empty() {
        return MultiPolygon::empty();
    }
    from_geo(&geo::unary_union(geo_polys.iter())).sorted()
}

/// Region enclosed by a possibly self-intersecting ring under the even-odd
/// rule, so both lobes of a bow tie survive.
pub(crate) fn repair_ring(vertices: &[Point]) -> MultiPolygon {
    let r = Ring::from_raw(vertices.to_vec());
    if r.len() < 3 {
        return MultiPolygon::empty();
    }
    let g = geo::Polygon::new(ring_to_geo(&r), Vec::new());
    from_geo(&g.union(&g)).sorted()
}

pub fn intersection(a: &MultiPolygon, b: &MultiPolygon) -> MultiPolygon {
    if a.is_empty() || b.is_empty() || !a.bbox().intersects(&b.bbox()) {
        return MultiPolygon::empty();
    }
    from_geo(&to_geo(a).intersection(&to_geo(b))).sorted()
}

pub fn difference(a: &MultiPolygon, b: &MultiPolygon) -> MultiPolygon {
    if a.is_empty() {
        return MultiPolygon::empty();
    }
    if b.is_empty() || !a.bbox().intersects(&b.bbox()) {
        return a.clone();
    }
    from_geo(&to_geo(a).difference(&to_geo(b))).sorted()
}

/// Area of the symmetric difference of two geometries.
pub fn symmetric_difference_area(a: &MultiPolygon, b: &MultiPolygon) -> f64 {
    difference(a, b).area() + difference(b, a).area()
}
