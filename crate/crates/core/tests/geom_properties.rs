mod common;

use std::f64::consts::PI;

use bldgen::building::footprints;
use bldgen::geom::{
    arc_tolerance, area, boolean_union, convex_hull, difference, disc, hausdorff_distance, hull_points,
    intersection, min_bounding_rectangle, min_separation, signed_buffer, simplify_ring, smooth_ring,
    MultiPolygon, Point, Polygon, Ring,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn square(x: f64, y: f64, s: f64) -> Polygon {
    Polygon::rect(x, y, s, s).unwrap()
}

fn l_shape() -> Polygon {
    Polygon::from_exterior(vec![
        pt(0.0, 0.0),
        pt(20.0, 0.0),
        pt(20.0, 10.0),
        pt(10.0, 10.0),
        pt(10.0, 20.0),
        pt(0.0, 20.0),
    ])
    .unwrap()
}

/// Convex polygon: hull of random points in a disc of radius `size`.
fn random_convex(rng: &mut ChaCha8Rng, size: f64) -> Polygon {
    loop {
        let n = rng.gen_range(5..20);
        let pts: Vec<Point> = (0..n)
            .map(|_| {
                let t = rng.gen_range(0.0..2.0 * PI);
                let r = size * rng.gen_range(0.2f64..1.0).sqrt();
                pt(100.0 + r * t.cos(), 50.0 + r * t.sin())
            })
            .collect();
        if let Ok(p) = Polygon::from_exterior(hull_points(&pts)) {
            if p.area() > 1.0 {
                return p;
            }
        }
    }
}

/// Star-shaped (so simple) polygon with random radii.
fn random_star(rng: &mut ChaCha8Rng) -> Polygon {
    let n = rng.gen_range(5..16);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let pts = angles
        .iter()
        .map(|&t| {
            let r = rng.gen_range(5.0..30.0);
            pt(r * t.cos(), r * t.sin())
        })
        .collect();
    Polygon::from_exterior(pts).unwrap_or_else(|_| random_star(rng))
}

// ---- area ----

#[test]
fn area_examples() {
    assert_eq!(area(&square(0.0, 0.0, 1.0)).unwrap(), 1.0);
    assert_eq!(area(&square(0.0, 0.0, 20.0)).unwrap(), 400.0);
    let hole = Ring::new(vec![pt(9.0, 9.0), pt(11.0, 9.0), pt(11.0, 11.0), pt(9.0, 11.0)]).unwrap();
    let holed = Polygon::new(square(0.0, 0.0, 20.0).exterior().clone(), vec![hole]).unwrap();
    assert!((area(&holed).unwrap() - 396.0).abs() < 1e-12);
}

#[test]
fn invalid_rings_rejected() {
    assert!(Polygon::from_exterior(vec![pt(0.0, 0.0), pt(1.0, 0.0)]).is_err());
    assert!(Polygon::from_exterior(vec![pt(0.0, 0.0), pt(2.0, 2.0), pt(2.0, 0.0), pt(0.0, 1.0)]).is_err());
    assert!(Polygon::from_exterior(vec![pt(0.0, 0.0), pt(f64::NAN, 0.0), pt(1.0, 1.0)]).is_err());
}

// ---- buffer ----

fn support(d: &[Point], n: Point) -> f64 {
    d.iter().map(|v| v.dot(n)).fold(f64::NEG_INFINITY, f64::max)
}

/// Mixed-area identity for convex sets: A(P + B) = A(P) + sum over edges of
/// |e| * h_B(n_e) + A(B).
fn minkowski_area(p: &Polygon, r: f64, arcs: usize) -> f64 {
    let d = disc(r, arcs);
    let disc_area = Polygon::from_exterior(d.clone()).unwrap().area();
    let v = p.exterior().vertices();
    let mut mixed = 0.0;
    for i in 0..v.len() {
        let e = v[(i + 1) % v.len()].sub(v[i]);
        let n = pt(e.y, -e.x).scale(1.0 / e.norm());
        mixed += e.norm() * support(&d, n);
    }
    p.area() + mixed + disc_area
}

#[test]
fn buffer_examples() {
    let sq: MultiPolygon = square(0.0, 0.0, 20.0).into();
    let dil = signed_buffer(&sq, 7.0, 8).unwrap();
    let approx = 400.0 + 4.0 * 20.0 * 7.0 + PI * 49.0;
    assert!((dil.area() - approx).abs() / approx < 0.01);
    let ero = signed_buffer(&sq, -7.0, 8).unwrap();
    assert_eq!(ero.len(), 1);
    assert!((ero.area() - 36.0).abs() < 1e-9);
    assert!(ero.parts()[0].exterior().vertices().iter().all(|q| (q.x - 7.0).abs() < 1e-9 || (q.x - 13.0).abs() < 1e-9));
    assert!(signed_buffer(&sq, -15.0, 8).unwrap().is_empty());
    assert_eq!(signed_buffer(&sq, 0.0, 8).unwrap(), sq);
    assert!(signed_buffer(&sq, 1.0, 3).is_err());
    assert!(signed_buffer(&sq, f64::INFINITY, 8).is_err());
}

#[test]
fn dilation_area_matches_mixed_area_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let p = random_convex(&mut rng, 25.0);
        let r = rng.gen_range(0.5..10.0);
        let got = signed_buffer(&p.clone().into(), r, 8).unwrap().area();
        let want = minkowski_area(&p, r, 8);
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    }
}

#[test]
fn buffer_round_trip_on_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let p = random_convex(&mut rng, 25.0);
        let d = rng.gen_range(1.0..8.0);
        let out = signed_buffer(&signed_buffer(&p.clone().into(), d, 8).unwrap(), -d, 8).unwrap();
        assert_eq!(out.len(), 1);
        let h = hausdorff_distance(&out.parts()[0], &p);
        assert!(h <= arc_tolerance(d, 8) + 1e-9, "hausdorff {h} > {}", arc_tolerance(d, 8));
    }
}

#[test]
fn erosion_and_dilation_bracket_input() {
    for seed in 0..25 {
        let scene = footprints(&common::random_scene(seed));
        let input = boolean_union(&[scene]).unwrap();
        for d in [2.0, 6.0] {
            let dil = signed_buffer(&input, d, 8).unwrap();
            let ero = signed_buffer(&input, -d, 8).unwrap();
            assert!(difference(&input, &dil).area() < 1e-9, "seed {seed}");
            assert!(difference(&ero, &input).area() < 1e-9, "seed {seed}");
            for p in dil.parts().iter().chain(ero.parts()) {
                assert!(p.is_valid());
                assert!(p.area() >= 1e-6);
            }
        }
    }
}

// ---- union ----

#[test]
fn union_examples() {
    let a: MultiPolygon = square(0.0, 0.0, 1.0).into();
    let b: MultiPolygon = square(5.0, 0.0, 1.0).into();
    let u = boolean_union(&[a.clone(), b]).unwrap();
    assert_eq!(u.len(), 2);
    assert!((u.area() - 2.0).abs() < 1e-12);
    let half: MultiPolygon = square(0.5, 0.0, 1.0).into();
    let u = boolean_union(&[a.clone(), half]).unwrap();
    assert_eq!(u.len(), 1);
    assert!((u.area() - 1.5).abs() < 1e-12);
    let u = boolean_union(&[a.clone(), a.clone()]).unwrap();
    assert!((u.area() - 1.0).abs() < 1e-12);
    assert!(difference(&a, &u).area() < 1e-9);
}

#[test]
fn union_covers_inputs_and_is_disjoint() {
    for seed in 0..30 {
        let bs = common::random_scene(seed);
        let u = boolean_union(&bs.iter().map(|b| MultiPolygon::from(b.footprint().clone())).collect::<Vec<_>>()).unwrap();
        let total: f64 = bs.iter().map(|b| b.area()).sum();
        assert!(u.area() <= total + 1e-9);
        for b in &bs {
            // The boolean backend snaps to a grid of about 2e-7 m at this
            // extent, so allow a 1 micron band along the boundary.
            let single: MultiPolygon = b.footprint().clone().into();
            let lost = difference(&single, &u).area();
            assert!(lost < 1e-6 * b.footprint().perimeter(), "seed {seed} building {}: {lost:e}", b.id());
        }
        let parts = u.parts();
        for i in 0..parts.len() {
            assert!(parts[i].is_valid());
            for j in i + 1..parts.len() {
                let overlap = intersection(&parts[i].clone().into(), &parts[j].clone().into());
                assert!(overlap.area() < 1e-9);
            }
        }
    }
}

#[test]
fn invalid_geometry_cannot_be_deserialized() {
    let bow_tie = r#"{"exterior":[{"x":0,"y":0},{"x":2,"y":2},{"x":2,"y":0},{"x":0,"y":1}]}"#;
    assert!(serde_json::from_str::<Polygon>(bow_tie).is_err());
    let flat = r#"{"exterior":[{"x":0,"y":0},{"x":1,"y":0},{"x":2,"y":0}]}"#;
    assert!(serde_json::from_str::<Polygon>(flat).is_err());
    let ok = serde_json::to_string(&square(0.0, 0.0, 2.0)).unwrap();
    assert_eq!(serde_json::from_str::<Polygon>(&ok).unwrap(), square(0.0, 0.0, 2.0));
}

// ---- hull and MBR ----

#[test]
fn hull_examples() {
    let sq = square(0.0, 0.0, 20.0);
    assert!((convex_hull(&sq).area() - 400.0).abs() < 1e-12);
    assert!((convex_hull(&l_shape()).area() - 350.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let p = random_star(&mut rng);
        let h = convex_hull(&p);
        assert!(h.area() >= p.area() - 1e-9);
        for v in p.exterior().vertices() {
            assert!(h.contains_point(*v) || h.exterior().vertices().contains(v) || bldgen::geom::point_ring_distance(*v, h.exterior()) < 1e-9);
        }
    }
}

/// Bounding-box area of `p` rotated by `-deg`.
fn oriented_box_area(p: &Polygon, deg: f64) -> f64 {
    let t = -deg.to_radians();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for v in p.exterior().vertices() {
        let q = v.rotate(t);
        x0 = x0.min(q.x);
        x1 = x1.max(q.x);
        y0 = y0.min(q.y);
        y1 = y1.max(q.y);
    }
    (x1 - x0) * (y1 - y0)
}

fn sweep_min(p: &Polygon) -> f64 {
    (0..900).map(|k| oriented_box_area(p, k as f64 * 0.1)).fold(f64::MAX, f64::min)
}

#[test]
fn mbr_examples() {
    let r = Polygon::rect(0.0, 0.0, 10.0, 4.0).unwrap();
    let m = min_bounding_rectangle(&r).unwrap();
    assert!(m.angle.abs() < 1e-9);
    assert!((m.width - 10.0).abs() < 1e-9 && (m.height - 4.0).abs() < 1e-9);

    let rot = r.map_points(|q| q.rotate(30f64.to_radians()));
    let m = min_bounding_rectangle(&rot).unwrap();
    assert!((m.angle - 30.0).abs() < 1e-9, "angle {}", m.angle);
    assert!((m.width - 10.0).abs() < 1e-9 && (m.height - 4.0).abs() < 1e-9);

    let l = l_shape();
    let m = min_bounding_rectangle(&l).unwrap();
    assert!((m.area() - sweep_min(&l)).abs() <= 1e-9 * m.area());
}

#[test]
fn mbr_matches_sweep_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let p = random_star(&mut rng);
        let m = min_bounding_rectangle(&p).unwrap();
        let oracle = sweep_min(&p);
        assert!(m.area() <= oracle * (1.0 + 1e-9));
        assert!((m.area() - oracle).abs() <= 1e-3 * oracle, "{} vs {}", m.area(), oracle);
        assert!(m.width >= m.height && m.height > 0.0);
        assert!((0.0..180.0).contains(&m.angle));
        let inside = intersection(&m.rect.clone().into(), &p.clone().into());
        assert!((inside.area() - p.area()).abs() < 1e-6 * p.area());
    }
}

// ---- separation ----

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    if ab.dot(ab) == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

fn sampled_separation(a: &Polygon, b: &Polygon) -> f64 {
    let sample = |p: &Polygon| -> Vec<Point> {
        let v = p.exterior().vertices();
        (0..v.len())
            .flat_map(|i| {
                let (s, e) = (v[i], v[(i + 1) % v.len()]);
                (0..200).map(move |k| s.lerp(e, k as f64 / 200.0))
            })
            .collect()
    };
    let edges = |p: &Polygon| -> Vec<(Point, Point)> {
        let v = p.exterior().vertices();
        (0..v.len()).map(|i| (v[i], v[(i + 1) % v.len()])).collect()
    };
    let one_way = |x: &Polygon, y: &Polygon| {
        let ey = edges(y);
        sample(x)
            .into_iter()
            .map(|q| ey.iter().map(|&(s, e)| seg_dist(q, s, e)).fold(f64::MAX, f64::min))
            .fold(f64::MAX, f64::min)
    };
    one_way(a, b).min(one_way(b, a))
}

#[test]
fn separation_examples() {
    assert!((min_separation(&square(0.0, 0.0, 10.0), &square(20.0, 0.0, 10.0)) - 10.0).abs() < 1e-12);
    assert_eq!(min_separation(&square(0.0, 0.0, 10.0), &square(5.0, 5.0, 10.0)), 0.0);
    assert_eq!(min_separation(&square(0.0, 0.0, 10.0), &square(10.0, 0.0, 10.0)), 0.0);
    assert_eq!(min_separation(&square(0.0, 0.0, 10.0), &square(2.0, 2.0, 3.0)), 0.0);
    let a = square(0.0, 0.0, 10.0);
    let b = square(13.0, 14.0, 10.0);
    assert!((min_separation(&a, &b) - 5.0).abs() < 1e-12);
    assert!((min_separation(&a, &b) - sampled_separation(&a, &b)).abs() < 1e-6);
}

#[test]
fn separation_matches_sampling_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 60 {
        let a = common::rotated_rect(1, pt(0.0, 0.0), rng.gen_range(4.0..20.0), rng.gen_range(4.0..20.0), rng.gen_range(0.0..PI));
        let b = common::rotated_rect(
            2,
            pt(rng.gen_range(10.0..40.0), rng.gen_range(-30.0..30.0)),
            rng.gen_range(4.0..20.0),
            rng.gen_range(4.0..20.0),
            rng.gen_range(0.0..PI),
        );
        let got = min_separation(a.footprint(), b.footprint());
        if got == 0.0 {
            continue;
        }
        let want = sampled_separation(a.footprint(), b.footprint());
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        checked += 1;
    }
}

// ---- simplification ----

/// Textbook recursive Douglas-Peucker on an open polyline.
fn dp_reference(pts: &[Point], tol: f64, keep: &mut Vec<bool>, lo: usize, hi: usize) {
    if hi <= lo + 1 {
        return;
    }
    let (mut best, mut idx) = (-1.0, lo);
    for i in lo + 1..hi {
        let d = seg_dist(pts[i], pts[lo], pts[hi]);
        if d > best {
            best = d;
            idx = i;
        }
    }
    if best > tol {
        keep[idx] = true;
        dp_reference(pts, tol, keep, lo, idx);
        dp_reference(pts, tol, keep, idx, hi);
    }
}

fn dp_ring_reference(r: &Ring, tol: f64) -> Vec<Point> {
    let mut pts = r.vertices().to_vec();
    pts.push(pts[0]);
    let n = pts.len();
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    dp_reference(&pts, tol, &mut keep, 0, n - 1);
    pts[..n - 1].iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect()
}

fn zigzag_ring() -> Ring {
    let mut v = vec![pt(0.0, 0.0)];
    for k in 1..20 {
        v.push(pt(5.0 * k as f64, if k % 2 == 1 { -1.0 } else { 1.0 }));
    }
    v.extend([pt(100.0, 0.0), pt(100.0, 40.0), pt(0.0, 40.0)]);
    Ring::new(v).unwrap()
}

#[test]
fn simplify_examples() {
    let with_mid = Ring::new(vec![
        pt(0.0, 0.0),
        pt(5.0, 0.0),
        pt(10.0, 0.0),
        pt(10.0, 5.0),
        pt(10.0, 10.0),
        pt(5.0, 10.0),
        pt(0.0, 10.0),
        pt(0.0, 5.0),
    ])
    .unwrap();
    assert_eq!(simplify_ring(&with_mid, 0.1).len(), 4);
    let sq = square(0.0, 0.0, 10.0);
    assert_eq!(&simplify_ring(sq.exterior(), 1.0), sq.exterior());
    assert_eq!(&simplify_ring(sq.exterior(), 0.0), sq.exterior());
}

#[test]
fn zigzag_matches_reference() {
    let z = zigzag_ring();
    let got = simplify_ring(&z, 2.0);
    assert_eq!(got.vertices(), &[pt(0.0, 0.0), pt(100.0, 0.0), pt(100.0, 40.0), pt(0.0, 40.0)][..]);
    assert_eq!(got.vertices(), &dp_ring_reference(&z, 2.0)[..]);
    // Below the amplitude nothing goes.
    assert_eq!(simplify_ring(&z, 0.5).len(), z.len());
}

#[test]
fn simplify_matches_reference_on_random_rings() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..60 {
        let p = random_star(&mut rng);
        let tol = rng.gen_range(0.1..4.0);
        let got = simplify_ring(p.exterior(), tol);
        let want = dp_ring_reference(p.exterior(), tol);
        // The implementation may back off to a lower tolerance when the
        // reference result is not a valid ring.
        match Ring::new(want.clone()) {
            Ok(r) if r.is_ccw() == p.exterior().is_ccw() => assert_eq!(got.vertices(), &want[..]),
            _ => assert!(got.is_valid()),
        }
        assert!(got.vertices().iter().all(|v| p.exterior().vertices().contains(v)));
    }
}

#[test]
fn smooth_examples() {
    let sq = square(0.0, 0.0, 1.0);
    assert_eq!(&smooth_ring(sq.exterior(), 0), sq.exterior());
    let oct = smooth_ring(sq.exterior(), 1);
    assert_eq!(oct.len(), 8);
    let expected = [
        pt(0.25, 0.0),
        pt(0.75, 0.0),
        pt(1.0, 0.25),
        pt(1.0, 0.75),
        pt(0.75, 1.0),
        pt(0.25, 1.0),
        pt(0.0, 0.75),
        pt(0.0, 0.25),
    ];
    for e in expected {
        assert!(oct.vertices().iter().any(|v| v.dist(e) < 1e-12), "missing {e:?}");
    }
    assert!((oct.area() - 0.875).abs() < 1e-12);
}

#[test]
fn smoothing_shrinks_convex_rings() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..50 {
        let p = random_convex(&mut rng, 20.0);
        let hull = convex_hull(&p);
        let mut prev = p.area();
        for it in 1..=5 {
            let s = smooth_ring(p.exterior(), it);
            assert_eq!(s.len(), p.exterior().len() << it);
            assert!(s.area() < prev + 1e-9);
            prev = s.area();
            for v in s.vertices() {
                assert!(hull.contains_point(*v) || bldgen::geom::point_ring_distance(*v, hull.exterior()) < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rect_buffer_is_exact(w in 1.0f64..50.0, h in 1.0f64..50.0, d in 0.1f64..10.0) {
        let r: MultiPolygon = Polygon::rect(3.0, -2.0, w, h).unwrap().into();
        let dil = signed_buffer(&r, d, 8).unwrap();
        let disc_area = 16.0 * d * d * (PI / 16.0).sin();
        prop_assert!((dil.area() - (w * h + 2.0 * (w + h) * d + disc_area)).abs() < 1e-6 * dil.area());
        let ero = signed_buffer(&r, -d, 8).unwrap();
        let inner = (w - 2.0 * d).max(0.0) * (h - 2.0 * d).max(0.0);
        if inner > 1e-3 {
            prop_assert!((ero.area() - inner).abs() < 1e-6 * r.area());
        } else if w.min(h) < 2.0 * d - 1e-6 {
            prop_assert!(ero.is_empty());
        }
    }

    #[test]
    fn mbr_rotation_equivariant(w in 2.0f64..40.0, h in 2.0f64..40.0, deg in 0.0f64..180.0) {
        prop_assume!((w - h).abs() > 0.1);
        let r = Polygon::rect(0.0, 0.0, w, h).unwrap().map_points(|q| q.rotate(deg.to_radians()));
        let m = min_bounding_rectangle(&r).unwrap();
        let long_axis = if w > h { deg } else { deg + 90.0 };
        let want = long_axis.rem_euclid(180.0);
        let diff = (m.angle - want).abs();
        prop_assert!(diff < 1e-6 || (180.0 - diff) < 1e-6, "{} vs {}", m.angle, want);
        prop_assert!((m.width - w.max(h)).abs() < 1e-6 && (m.height - w.min(h)).abs() < 1e-6);
    }
}
