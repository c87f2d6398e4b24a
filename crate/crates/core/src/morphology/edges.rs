use crate::geom::{Point, Polygon, Ring};

/// Rings are never reduced below this many vertices.
pub const MIN_RING_VERTICES: usize = 4;

/// How far (in multiples of `min_len`) the extended neighbour edges may
/// meet from the removed edge for the corner to be restored.
const CORNER_REACH: f64 = 3.0;

fn line_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<(Point, f64, f64)> {
    let r = b.sub(a);
    let s = d.sub(c);
    let denom = r.cross(s);
    if denom.abs() <= 1e-12 * r.norm() * s.norm() {
        return None;
    }
    let t = c.sub(a).cross(s) / denom;
    let u = c.sub(a).cross(r) / denom;
    Some((a.add(r.scale(t)), t, u))
}

fn replace_edge(v: &[Point], i: usize, with: &[Point]) -> Vec<Point> {
    let n = v.len();
    let j = (i + 1) % n;
    let mut out = Vec::with_capacity(n);
    if j == 0 {
        // Edge wraps: drop last and first vertex.
        out.extend_from_slice(with);
        out.extend_from_slice(&v[1..n - 1]);
    } else {
        out.extend_from_slice(&v[..i]);
        out.extend_from_slice(with);
        out.extend_from_slice(&v[j + 1..]);
    }
    out
}

/// Candidate rings for removing edge `i`, most preferred first.
fn repairs(v: &[Point], i: usize, min_len: f64) -> Vec<Vec<Point>> {
    let n = v.len();
    let a = v[(i + n - 1) % n];
    let b = v[i];
    let c = v[(i + 1) % n];
    let d = v[(i + 2) % n];
    let mut out = Vec::with_capacity(4);
    // Extend a->b forward and d->c backward toward each other.
    if let Some((x, t, u)) = line_intersection(a, b, d, c) {
        let reach = crate::geom::point_segment_distance(x, b, c);
        if t >= 1.0 - 1e-9 && u >= 1.0 - 1e-9 && reach <= CORNER_REACH * min_len {
            out.push(replace_edge(v, i, &[x]));
        }
    }
    out.push(replace_edge(v, i, &[b.lerp(c, 0.5)]));
    out.push(replace_edge(v, i, &[c]));
    out.push(replace_edge(v, i, &[b]));
    out
}

fn simplify_ring_edges(ring: &Ring, min_len: f64, area_budget: &mut f64) -> Ring {
    let ccw = ring.is_ccw();
    let mut v = ring.vertices().to_vec();
    loop {
        let n = v.len();
        if n <= MIN_RING_VERTICES {
            break;
        }
        let mut short: Vec<(f64, usize)> = (0..n)
            .map(|i| (v[i].dist(v[(i + 1) % n]), i))
            .filter(|(len, _)| *len < min_len)
            .collect();
        if short.is_empty() {
            break;
        }
        short.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let current_area = Ring::from_raw(v.clone()).signed_area();
        let mut applied = false;
        'edges: for &(_, i) in &short {
            for cand in repairs(&v, i, min_len) {
                let r = Ring::from_raw(cand);
                if r.len() < 3 || r.is_ccw() != ccw || !r.is_valid() {
                    continue;
                }
                let delta = (r.signed_area() - current_area).abs();
                if delta > *area_budget {
                    continue;
                }
                *area_budget -= delta;
                v = r.into_vertices();
                applied = true;
                break 'edges;
            }
        }
        if !applied {
            break;
        }
    }
    Ring::from_raw(v)
}

/// Removes edges shorter than `min_len`, shortest first. Each short edge is
/// replaced by the corner where its neighbour edges meet when that corner
/// lies within `3 * min_len`, else collapsed to its midpoint. Rings stop
/// shrinking at four vertices; the total area change stays within
/// `min_len * perimeter`.
pub fn remove_short_edges(p: &Polygon, min_len: f64) -> Polygon {
    if min_len <= 0.0 {
        return p.clone();
    }
    let mut budget = min_len * p.perimeter();
    let exterior = simplify_ring_edges(p.exterior(), min_len, &mut budget);
    let holes: Vec<Ring> = p
        .holes()
        .iter()
        .map(|h| simplify_ring_edges(h, min_len, &mut budget))
        .collect();
    let candidate = Polygon::from_rings_unchecked(exterior.clone(), holes);
    if candidate.is_valid() {
        return candidate;
    }
    let with_original_holes = Polygon::from_rings_unchecked(exterior, p.holes().to_vec());
    if with_original_holes.is_valid() {
        return with_original_holes;
    }
    p.clone()
}
