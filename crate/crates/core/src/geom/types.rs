use serde::{Deserialize, Serialize};

use super::GeomError;

/// Rings whose absolute area falls below this are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.sub(o).norm()
    }

    /// Rotates counter-clockwise about the origin by `angle` radians.
    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * t, self.y + (o.y - self.y) * t)
    }
}

/// Closed ring of vertices. The closing vertex is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Ring {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for Ring {
    type Error = GeomError;

    fn try_from(v: Vec<Point>) -> Result<Ring, GeomError> {
        Ring::new(v)
    }
}

impl From<Ring> for Vec<Point> {
    fn from(r: Ring) -> Vec<Point> {
        r.vertices
    }
}

impl Ring {
    /// Builds a validated ring. A repeated closing vertex and consecutive
    /// duplicates are dropped; orientation is left as given.
    pub fn new(vertices: Vec<Point>) -> Result<Ring, GeomError> {
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(GeomError::NonFinite { x: p.x, y: p.y });
        }
        let ring = Ring::from_raw(vertices);
        ring.validate()?;
        Ok(ring)
    }

    /// Cleans duplicate vertices without validating. Used for output of
    /// trusted kernels (boolean ops) and for intermediate candidates.
    pub(crate) fn from_raw(mut vertices: Vec<Point>) -> Ring {
        vertices.dedup();
        while vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        Ring { vertices }
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        let n = self.vertices.len();
        if n < 3 {
            return Err(GeomError::TooFewVertices(n));
        }
        if self.signed_area().abs() < DEGENERATE_AREA {
            return Err(GeomError::ZeroArea);
        }
        if let Some((i, j)) = self.first_self_intersection() {
            return Err(GeomError::SelfIntersection { edge_a: i, edge_b: j });
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterates over the edges `(v[i], v[i+1])`, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; positive for counter-clockwise rings.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        // Shift to the first vertex to limit cancellation on large coordinates.
        let o = self.vertices[0];
        let mut acc = 0.0;
        for i in 1..n - 1 {
            let a = self.vertices[i].sub(o);
            let b = self.vertices[i + 1].sub(o);
            acc += a.cross(b);
        }
        acc * 0.5
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn is_ccw(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    pub fn shortest_edge(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn reversed(mut self) -> Ring {
        self.vertices.reverse();
        self
    }

    pub(crate) fn oriented(self, ccw: bool) -> Ring {
        if self.is_ccw() == ccw {
            self
        } else {
            self.reversed()
        }
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Ring {
        Ring::from_raw(self.vertices.iter().map(|&p| f(p)).collect())
    }

    /// Even-odd point-in-ring test. Points on the boundary may go either way.
    pub fn contains_point(&self, p: Point) -> bool {
        let v = &self.vertices;
        let n = v.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (v[i], v[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Index pair of the first two non-adjacent edges that touch or cross,
    /// or of adjacent edges that fold back onto each other.
    pub fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return None;
        }
        let boxes: Vec<Bbox> = (0..n).map(|i| Bbox::of_segment(v[i], v[(i + 1) % n])).collect();
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !boxes[i].intersects(&boxes[j]) {
                    continue;
                }
                let (c, d) = (v[j], v[(j + 1) % n]);
                if adjacent {
                    // Shared vertex; reject only collinear overlap (a spike).
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    let u = p.sub(shared);
                    let w = q.sub(shared);
                    let cr = u.cross(w);
                    if cr.abs() <= 1e-12 * u.norm() * w.norm() && u.dot(w) > 0.0 {
                        return Some((i, j));
                    }
                    continue;
                }
                if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    fn orient(p: Point, q: Point, r: Point) -> f64 {
        q.sub(p).cross(r.sub(p))
    }
    fn on_segment(p: Point, q: Point, r: Point) -> bool {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min: Point,
    pub max: Point,
}

impl Bbox {
    pub fn empty() -> Bbox {
        Bbox {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_segment(a: Point, b: Point) -> Bbox {
        let mut bb = Bbox::empty();
        bb.extend(a);
        bb.extend(b);
        bb
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Bbox {
        let mut bb = Bbox::empty();
        for p in pts {
            bb.extend(*p);
        }
        bb
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    pub fn extend(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn merge(&mut self, o: &Bbox) {
        if !o.is_empty() {
            self.extend(o.min);
            self.extend(o.max);
        }
    }

    pub fn intersects(&self, o: &Bbox) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    pub fn expanded(&self, d: f64) -> Bbox {
        Bbox {
            min: Point::new(self.min.x - d, self.min.y - d),
            max: Point::new(self.max.x + d, self.max.y + d),
        }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Gap between two boxes (0 when they overlap).
    pub fn distance(&self, o: &Bbox) -> f64 {
        let dx = (o.min.x - self.max.x).max(self.min.x - o.max.x).max(0.0);
        let dy = (o.min.y - self.max.y).max(self.min.y - o.max.y).max(0.0);
        dx.hypot(dy)
    }
}

/// Polygon with a counter-clockwise exterior and clockwise holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonRepr")]
pub struct Polygon {
    exterior: Ring,
    holes: Vec<Ring>,
}

#[derive(Deserialize)]
struct PolygonRepr {
    exterior: Ring,
    #[serde(default)]
    holes: Vec<Ring>,
}

impl TryFrom<PolygonRepr> for Polygon {
    type Error = GeomError;

    fn try_from(r: PolygonRepr) -> Result<Polygon, GeomError> {
        Polygon::new(r.exterior, r.holes)
    }
}

impl Polygon {
    /// Validates rings, normalizes orientation, and checks that every hole
    /// lies inside the exterior and outside the other holes.
    pub fn new(exterior: Ring, holes: Vec<Ring>) -> Result<Polygon, GeomError> {
        exterior.validate()?;
        for h in &holes {
            h.validate()?;
        }
        let poly = Polygon::from_rings_unchecked(exterior, holes);
        for (i, h) in poly.holes.iter().enumerate() {
            let probe = ring_interior_probe(h);
            if !poly.exterior.contains_point(probe) {
                return Err(GeomError::HoleOutsideShell(i));
            }
            for (j, other) in poly.holes.iter().enumerate() {
                if i != j && other.contains_point(probe) {
                    return Err(GeomError::OverlappingHoles(i, j));
                }
            }
            for (ea, eb) in h.edges() {
                for (fa, fb) in poly.exterior.edges() {
                    if segments_intersect(ea, eb, fa, fb) {
                        return Err(GeomError::HoleOutsideShell(i));
                    }
                }
            }
        }
        Ok(poly)
    }

    pub fn from_exterior(vertices: Vec<Point>) -> Result<Polygon, GeomError> {
        Polygon::new(Ring::new(vertices)?, Vec::new())
    }

    /// Axis-aligned rectangle with lower-left corner `(x, y)`.
    pub fn rect(x: f64, y: f64, w: f64, h: f64) -> Result<Polygon, GeomError> {
        Polygon::from_exterior(vec![
            Point::new(x, y),
            Point::new(x + w, y),
            Point::new(x + w, y + h),
            Point::new(x, y + h),
        ])
    }

    pub(crate) fn from_rings_unchecked(exterior: Ring, holes: Vec<Ring>) -> Polygon {
        Polygon {
            exterior: exterior.oriented(true),
            holes: holes.into_iter().map(|h| h.oriented(false)).collect(),
        }
    }

    pub fn exterior(&self) -> &Ring {
        &self.exterior
    }

    pub fn holes(&self) -> &[Ring] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }

    pub fn area(&self) -> f64 {
        self.exterior.area() - self.holes.iter().map(Ring::area).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.rings().map(Ring::perimeter).sum()
    }

    pub fn vertex_count(&self) -> usize {
        self.rings().map(Ring::len).sum()
    }

    pub fn bbox(&self) -> Bbox {
        Bbox::of_points(self.exterior.vertices())
    }

    pub fn shortest_edge(&self) -> f64 {
        self.rings().map(Ring::shortest_edge).fold(f64::INFINITY, f64::min)
    }

    /// Area centroid of the polygon, holes included.
    pub fn centroid(&self) -> Point {
        let o = self.exterior.vertices()[0];
        let mut a_sum = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for ring in self.rings() {
            for (p, q) in ring.edges() {
                let (p, q) = (p.sub(o), q.sub(o));
                let c = p.cross(q);
                a_sum += c;
                cx += (p.x + q.x) * c;
                cy += (p.y + q.y) * c;
            }
        }
        if a_sum.abs() < 1e-300 {
            return o;
        }
        Point::new(o.x + cx / (3.0 * a_sum), o.y + cy / (3.0 * a_sum))
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.exterior.contains_point(p) && !self.holes.iter().any(|h| h.contains_point(p))
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point + Copy) -> Polygon {
        Polygon::from_rings_unchecked(
            self.exterior.map_points(f),
            self.holes.iter().map(|h| h.map_points(f)).collect(),
        )
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Polygon {
        self.map_points(|p| Point::new(p.x + dx, p.y + dy))
    }

    pub fn with_holes(&self, holes: Vec<Ring>) -> Polygon {
        Polygon::from_rings_unchecked(self.exterior.clone(), holes)
    }

    pub fn is_valid(&self) -> bool {
        Polygon::new(self.exterior.clone(), self.holes.clone()).is_ok()
    }
}

/// A point strictly inside a ring, used to test hole placement.
fn ring_interior_probe(r: &Ring) -> Point {
    // Midpoint of the first edge nudged toward the interior.
    let v = r.vertices();
    let (a, b) = (v[0], v[1]);
    let mid = a.lerp(b, 0.5);
    let dir = b.sub(a);
    let len = dir.norm();
    let normal = Point::new(-dir.y / len, dir.x / len);
    let eps = (len * 1e-6).max(1e-9);
    let cand = mid.add(normal.scale(eps));
    if r.contains_point(cand) {
        cand
    } else {
        mid.sub(normal.scale(eps))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MultiPolygon {
    parts: Vec<Polygon>,
}

impl MultiPolygon {
    pub fn new(parts: Vec<Polygon>) -> MultiPolygon {
        MultiPolygon { parts }
    }

    pub fn empty() -> MultiPolygon {
        MultiPolygon { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[Polygon] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Polygon> {
        self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn area(&self) -> f64 {
        self.parts.iter().map(Polygon::area).sum()
    }

    pub fn bbox(&self) -> Bbox {
        let mut bb = Bbox::empty();
        for p in &self.parts {
            bb.merge(&p.bbox());
        }
        bb
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        self.parts.iter().flat_map(|p| p.rings())
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.parts.iter().any(|poly| poly.contains_point(p))
    }

    /// Sorts parts by centroid (x, then y) for a canonical order.
    pub fn sorted(mut self) -> MultiPolygon {
        let mut keyed: Vec<(Point, Polygon)> =
            self.parts.drain(..).map(|p| (p.centroid(), p)).collect();
        keyed.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));
        MultiPolygon::new(keyed.into_iter().map(|(_, p)| p).collect())
    }
}

impl From<Polygon> for MultiPolygon {
    fn from(p: Polygon) -> Self {
        MultiPolygon::new(vec![p])
    }
}

impl FromIterator<Polygon> for MultiPolygon {
    fn from_iter<I: IntoIterator<Item = Polygon>>(iter: I) -> Self {
        MultiPolygon::new(iter.into_iter().collect())
    }
}
