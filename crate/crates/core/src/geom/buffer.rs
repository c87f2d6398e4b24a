//! Dilation and erosion by a disc.
//!
//! The disc is approximated by a regular polygon with `4 * arc_segments`
//! vertices inscribed in the circle of radius `|d|`, one vertex on each
//! axis. Dilation is the input united with every boundary edge swept by the
//! disc; erosion removes that same swept boundary from the input. Both are
//! exact Minkowski operations for the polygonal disc, so closure and
//! opening built on them keep their set-theoretic identities.

use std::f64::consts::PI;

use super::boolean::{difference, union_unchecked, validate_multi};
use super::hull::hull_points;
use super::{GeomError, MultiPolygon, Point, Polygon, Ring};

pub const DEFAULT_ARC_SEGMENTS: usize = 8;

/// Maximum distance between the true circle and its polygonal stand-in.
pub fn arc_tolerance(d: f64, arc_segments: usize) -> f64 {
    d.abs() * (1.0 - (PI / (4.0 * arc_segments as f64)).cos())
}

/// Regular `4 * arc_segments`-gon of circumradius `radius`, centred on the origin.
pub fn disc(radius: f64, arc_segments: usize) -> Vec<Point> {
    let n = 4 * arc_segments;
    (0..n)
        .map(|k| {
            let t = k as f64 * 2.0 * PI / n as f64;
            Point::new(radius * t.cos(), radius * t.sin())
        })
        .collect()
}

/// Convex region swept by the disc along the segment `a`–`b`.
fn swept_segment(a: Point, b: Point, disc: &[Point]) -> Polygon {
    let mut pts = Vec::with_capacity(disc.len() * 2);
    pts.extend(disc.iter().map(|p| p.add(a)));
    pts.extend(disc.iter().map(|p| p.add(b)));
    Polygon::from_rings_unchecked(Ring::from_raw(hull_points(&pts)), Vec::new())
}

fn swept_boundary(g: &MultiPolygon, disc: &[Point]) -> Vec<Polygon> {
    g.rings()
        .flat_map(|r| r.edges().map(|(a, b)| swept_segment(a, b, disc)))
        .collect()
}

/// Positive `d` dilates, negative `d` erodes, zero returns the input.
pub fn signed_buffer(g: &MultiPolygon, d: f64, arc_segments: usize) -> Result<MultiPolygon, GeomError> {
    if !d.is_finite() {
        return Err(GeomError::InvalidParameter(format!("buffer distance {d} is not finite")));
    }
    if arc_segments < 4 {
        return Err(GeomError::InvalidParameter(format!(
            "arc_segments must be at least 4, got {arc_segments}"
        )));
    }
    validate_multi(g)?;
    Ok(buffer_unchecked(g, d, arc_segments))
}

pub(crate) fn buffer_unchecked(g: &MultiPolygon, d: f64, arc_segments: usize) -> MultiPolygon {
    if d == 0.0 || g.is_empty() {
        return g.clone();
    }
    let disc = disc(d.abs(), arc_segments);
    let swept = swept_boundary(g, &disc);
    if d > 0.0 {
        union_unchecked(g.parts().iter().chain(swept.iter()))
    } else {
        let band = union_unchecked(swept.iter());
        difference(g, &band)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(s: f64) -> MultiPolygon {
        Polygon::rect(0.0, 0.0, s, s).unwrap().into()
    }

    #[test]
    fn dilation_matches_minkowski_formula() {
        let out = signed_buffer(&square(20.0), 7.0, 8).unwrap();
        let exact = 400.0 + 4.0 * 20.0 * 7.0 + PI * 49.0;
        assert_eq!(out.len(), 1);
        assert!(out.area() < exact);
        assert!((exact - out.area()) / exact < 0.01, "area {}", out.area());
        // Inscribed 32-gon: straight sides exact, corners lose pi r^2 - area(32-gon).
        let polygon_disc = 16.0 * 49.0 * (2.0 * PI / 32.0).sin();
        assert!((out.area() - (960.0 + polygon_disc)).abs() < 1e-6);
    }

    #[test]
    fn erosion_of_square() {
        let out = signed_buffer(&square(20.0), -7.0, 8).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.area() - 36.0).abs() < 1e-9, "area {}", out.area());
    }

    #[test]
    fn erosion_beyond_inradius_is_empty() {
        assert!(signed_buffer(&square(20.0), -15.0, 8).unwrap().is_empty());
    }

    #[test]
    fn zero_distance_is_identity() {
        let sq = square(3.0);
        assert_eq!(signed_buffer(&sq, 0.0, 8).unwrap(), sq);
    }

    #[test]
    fn erosion_splits_dumbbell() {
        let dumbbell = Polygon::from_exterior(vec![
            Point::new(0.0, 0.0),
            Point::new(20.0, 0.0),
            Point::new(20.0, 8.0),
            Point::new(30.0, 8.0),
            Point::new(30.0, 0.0),
            Point::new(50.0, 0.0),
            Point::new(50.0, 20.0),
            Point::new(30.0, 20.0),
            Point::new(30.0, 12.0),
            Point::new(20.0, 12.0),
            Point::new(20.0, 20.0),
            Point::new(0.0, 20.0),
        ])
        .unwrap();
        let out = signed_buffer(&dumbbell.into(), -3.0, 8).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn dilation_fuses_neighbours() {
        let g = MultiPolygon::new(vec![
            Polygon::rect(0.0, 0.0, 10.0, 10.0).unwrap(),
            Polygon::rect(14.0, 0.0, 10.0, 10.0).unwrap(),
        ]);
        assert_eq!(signed_buffer(&g, 2.5, 8).unwrap().len(), 1);
        assert_eq!(signed_buffer(&g, 1.5, 8).unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(signed_buffer(&square(1.0), 1.0, 3).is_err());
        assert!(signed_buffer(&square(1.0), f64::NAN, 8).is_err());
    }

    #[test]
    fn arc_tolerance_formula() {
        assert!((arc_tolerance(7.0, 8) - 7.0 * (1.0 - (PI / 32.0).cos())).abs() < 1e-15);
    }
}
