//! Douglas–Peucker simplification and Chaikin smoothing for closed rings.

use super::distance::point_segment_distance;
use super::{Point, Ring};

pub const MAX_SMOOTH_ITERATIONS: usize = 5;

/// Indices kept by Douglas–Peucker on the closed polyline `v[0] .. v[n-1], v[0]`.
fn douglas_peucker_keep(v: &[Point], tolerance: f64) -> Vec<usize> {
    let n = v.len();
    // Index n stands for the repeated closing vertex.
    let at = |i: usize| v[i % n];
    let mut keep = vec![false; n + 1];
    keep[0] = true;
    keep[n] = true;
    let mut stack = vec![(0usize, n)];
    while let Some((lo, hi)) = stack.pop() {
        if hi <= lo + 1 {
            continue;
        }
        let (a, b) = (at(lo), at(hi));
        let mut far = lo;
        let mut far_d = -1.0;
        for i in lo + 1..hi {
            let d = point_segment_distance(at(i), a, b);
            if d > far_d {
                far_d = d;
                far = i;
            }
        }
        if far_d > tolerance {
            keep[far] = true;
            stack.push((far, hi));
            stack.push((lo, far));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

/// Douglas–Peucker on a closed ring. If the result would be invalid, the
/// tolerance is halved until it is valid, ending at the input itself.
pub fn simplify_ring(r: &Ring, tolerance: f64) -> Ring {
    if tolerance <= 0.0 || r.len() <= 3 {
        return r.clone();
    }
    let mut tol = tolerance;
    for _ in 0..32 {
        let keep = douglas_peucker_keep(r.vertices(), tol);
        let cand = Ring::from_raw(keep.iter().map(|&i| r.vertices()[i]).collect());
        if cand.is_valid() {
            return cand;
        }
        tol *= 0.5;
    }
    r.clone()
}

/// Chaikin corner cutting: every edge `p -> q` becomes the points at 1/4
/// and 3/4 along it. Iterations are capped at [`MAX_SMOOTH_ITERATIONS`].
pub fn smooth_ring(r: &Ring, iterations: usize) -> Ring {
    let mut pts = r.vertices().to_vec();
    for _ in 0..iterations.min(MAX_SMOOTH_ITERATIONS) {
        let n = pts.len();
        let mut next = Vec::with_capacity(2 * n);
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            next.push(p.lerp(q, 0.25));
            next.push(p.lerp(q, 0.75));
        }
        pts = next;
    }
    Ring::from_raw(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn collinear_midpoints_removed() {
        let r = Ring::new(pts(&[
            (0.0, 0.0),
            (5.0, 0.0),
            (10.0, 0.0),
            (10.0, 5.0),
            (10.0, 10.0),
            (5.0, 10.0),
            (0.0, 10.0),
            (0.0, 5.0),
        ]))
        .unwrap();
        let s = simplify_ring(&r, 0.1);
        assert_eq!(s.len(), 4);
        assert!((s.area() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn plain_square_unchanged() {
        let r = Ring::new(pts(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)])).unwrap();
        assert_eq!(simplify_ring(&r, 1.0), r);
    }

    #[test]
    fn falls_back_when_collapse_would_be_invalid() {
        // Thin triangle-ish ring: huge tolerance would leave < 3 vertices.
        let r = Ring::new(pts(&[(0.0, 0.0), (100.0, 0.0), (100.0, 1.0), (0.0, 1.0)])).unwrap();
        let s = simplify_ring(&r, 50.0);
        assert!(s.is_valid());
    }

    #[test]
    fn smoothing_identity_and_octagon() {
        let r = Ring::new(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert_eq!(smooth_ring(&r, 0), r);
        let s = smooth_ring(&r, 1);
        let expected = pts(&[
            (0.25, 0.0),
            (0.75, 0.0),
            (1.0, 0.25),
            (1.0, 0.75),
            (0.75, 1.0),
            (0.25, 1.0),
            (0.0, 0.75),
            (0.0, 0.25),
        ]);
        assert_eq!(s.vertices(), expected.as_slice());
        assert!((s.area() - (1.0 - 4.0 * 0.5 * 0.25 * 0.25)).abs() < 1e-12);
    }

    #[test]
    fn smoothing_iterations_capped() {
        let r = Ring::new(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])).unwrap();
        assert_eq!(smooth_ring(&r, 9).len(), 4 << MAX_SMOOTH_ITERATIONS);
    }
}
