//! Scene builders shared by the integration tests.
#![allow(dead_code)]

use bldgen::building::footprints;
use bldgen::geom::{boolean_union, point_ring_distance, signed_buffer, MultiPolygon, Point, Polygon};
use bldgen::morphology::fill_small_holes;
use bldgen::Building;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rect(id: u64, x: f64, y: f64, w: f64, h: f64) -> Building {
    Building::new(id, Polygon::rect(x, y, w, h).unwrap()).unwrap()
}

/// Rectangle of size `w` x `h` centred on `c`, rotated by `angle` radians.
pub fn rotated_rect(id: u64, c: Point, w: f64, h: f64, angle: f64) -> Building {
    let corners = [(-w / 2.0, -h / 2.0), (w / 2.0, -h / 2.0), (w / 2.0, h / 2.0), (-w / 2.0, h / 2.0)];
    let pts = corners
        .iter()
        .map(|&(x, y)| Point::new(x, y).rotate(angle).add(c))
        .collect();
    Building::new(id, Polygon::from_exterior(pts).unwrap()).unwrap()
}

/// Four 10x10 houses in a row separated by `gap`, plus an isolated 8x8 shed.
pub fn terraced_row(gap: f64) -> Vec<Building> {
    let mut v: Vec<Building> = (0..4).map(|i| rect(i + 1, i as f64 * (10.0 + gap), 0.0, 10.0, 10.0)).collect();
    v.push(rect(5, 0.0, 80.0, 8.0, 8.0));
    v
}

/// `n` x `n` grid of `size` m squares at `pitch` m spacing, ids from `first_id`.
pub fn grid(n: usize, size: f64, pitch: f64, ox: f64, oy: f64, first_id: u64) -> Vec<Building> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            out.push(rect(
                first_id + (j * n + i) as u64,
                ox + i as f64 * pitch,
                oy + j as f64 * pitch,
                size,
                size,
            ));
        }
    }
    out
}

const EXTENT: f64 = 220.0;

fn random_building(rng: &mut ChaCha8Rng, id: u64) -> Building {
    let c = Point::new(rng.gen_range(0.0..EXTENT), rng.gen_range(0.0..EXTENT));
    let w = rng.gen_range(5.0..40.0);
    let h = rng.gen_range(5.0..40.0);
    let angle = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..std::f64::consts::PI) };
    rotated_rect(id, c, w, h, angle)
}

/// Up to 30 randomly placed, randomly rotated rectangles with sides 5-40 m.
pub fn random_scene(seed: u64) -> Vec<Building> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(5..=30);
    (0..n).map(|i| random_building(&mut rng, i as u64 + 1)).collect()
}

/// Features thinner than this fall below the resolution of a 0.25 m raster.
pub const RESOLUTION: f64 = 0.25;

fn buffer(g: &MultiPolygon, d: f64) -> MultiPolygon {
    signed_buffer(g, d, 8).unwrap()
}

/// Largest distance from a vertex of `a` to the region `b`.
fn excess(a: &MultiPolygon, b: &MultiPolygon) -> f64 {
    a.rings()
        .flat_map(|r| r.vertices().iter().copied())
        .map(|p| {
            if b.contains_point(p) {
                0.0
            } else {
                b.rings().map(|r| point_ring_distance(p, r)).fold(f64::INFINITY, f64::min)
            }
        })
        .fold(0.0, f64::max)
}

fn stable(lo: &MultiPolygon, hi: &MultiPolygon) -> bool {
    lo.len() == hi.len() && excess(lo, hi).max(excess(hi, lo)) <= 4.0
}

/// True when neither the closure nor the opening at radius `r` hinges on a
/// gap or width within [`RESOLUTION`] of `2r`. Moving the radius by that
/// much may slide cusps along shallow arcs by a few metres, but must not
/// add or remove a part or a disc-sized lobe; a scene that fails has a
/// feature whose fate no 0.25 m raster can reproduce.
pub fn well_conditioned(scene: &[Building], r: f64) -> bool {
    let d = RESOLUTION;
    let union = boolean_union(&[footprints(scene)]).unwrap();
    let close = |r: f64| buffer(&buffer(&union, r), -r);
    let closed = close(r);
    if !stable(&close(r - d), &close(r + d)) {
        return false;
    }
    let closed = fill_small_holes(&closed, std::f64::consts::PI * r * r);
    let open = |r: f64| buffer(&buffer(&closed, -r), r);
    stable(&open(r - d), &open(r + d))
}

/// Like [`random_scene`], but each building is redrawn (up to 40 times,
/// then dropped) while it would leave the scene ill conditioned at any of
/// `radii`. Only neighbours that the new building can interact with take
/// part in the check.
pub fn conditioned_scene(seed: u64, radii: &[f64]) -> Vec<Building> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(5..=30);
    let reach = 4.0 * radii.iter().copied().fold(0.0, f64::max) + 10.0;
    let mut scene: Vec<Building> = Vec::with_capacity(n);
    for i in 0..n {
        for _ in 0..40 {
            let b = random_building(&mut rng, i as u64 + 1);
            let bb = b.footprint().bbox();
            let mut local: Vec<Building> = scene
                .iter()
                .filter(|o| o.footprint().bbox().distance(&bb) <= reach)
                .cloned()
                .collect();
            local.push(b.clone());
            if radii.iter().all(|&r| well_conditioned(&local, r)) {
                scene.push(b);
                break;
            }
        }
    }
    scene
}

/// Grid town whose settlement envelope (25 m dilation, 10 m erosion) is
/// about 600 000 m²: 22 x 22 squares of 20 m at 34.5 m pitch.
pub fn town_600k() -> Vec<Building> {
    grid(22, 20.0, 34.5, 0.0, 0.0, 1)
}

/// As [`town_600k`] but about 800 000 m²: 25 x 25 squares at 35.2 m pitch.
pub fn town_800k() -> Vec<Building> {
    grid(25, 20.0, 35.2, 0.0, 0.0, 1)
}

fn sheared(id: u64, x: f64, y: f64, w: f64, h: f64, deg: f64) -> Building {
    let s = h * deg.to_radians().tan();
    let pts = vec![
        Point::new(x, y),
        Point::new(x + w, y),
        Point::new(x + w + s, y + h),
        Point::new(x + s, y + h),
    ];
    Building::new(id, Polygon::from_exterior(pts).unwrap()).unwrap()
}

/// Twelve buildings on a 60 m pitch covering the micro cases at 1:25K:
/// compliant, too small to keep, to be enlarged, skewed, short-edged, big
/// and non-rectilinear. Ids 1 to 12.
pub fn agent_block_25k() -> Vec<Building> {
    let at = |k: u64| (((k - 1) % 4) as f64 * 60.0, ((k - 1) / 4) as f64 * 60.0);
    let notch = |id: u64| {
        let (x, y) = at(id);
        let pts = vec![
            Point::new(x, y),
            Point::new(x + 24.0, y),
            Point::new(x + 24.0, y + 16.0),
            Point::new(x + 20.0, y + 16.0),
            Point::new(x + 20.0, y + 20.0),
            Point::new(x, y + 20.0),
        ];
        Building::new(id, Polygon::from_exterior(pts).unwrap()).unwrap()
    };
    let round = |id: u64| {
        let (x, y) = at(id);
        let pts = (0..24)
            .map(|i| {
                let t = i as f64 / 24.0 * std::f64::consts::TAU;
                Point::new(x + 15.0 + 10.0 * t.cos(), y + 15.0 + 10.0 * t.sin())
            })
            .collect();
        Building::new(id, Polygon::from_exterior(pts).unwrap()).unwrap()
    };
    let r = |id: u64, w: f64, h: f64| {
        let (x, y) = at(id);
        rect(id, x, y, w, h)
    };
    let sh = |id: u64, w: f64, h: f64, deg: f64| {
        let (x, y) = at(id);
        sheared(id, x, y, w, h, deg)
    };
    let (x5, y5) = at(5);
    vec![
        r(1, 20.0, 20.0),
        r(2, 12.0, 12.0),
        r(3, 8.0, 9.0),
        sh(4, 20.0, 14.0, 4.0),
        rotated_rect(5, Point::new(x5 + 15.0, y5 + 15.0), 15.0, 18.0, 0.3),
        notch(6),
        r(7, 9.0, 10.0),
        sh(8, 11.0, 11.0, 3.0),
        r(9, 30.0, 25.0),
        r(10, 40.0, 35.0),
        round(11),
        sh(12, 14.0, 13.0, -6.0),
    ]
}

/// Axis-aligned block covering `bs` with a margin.
pub fn block_around(id: u64, bs: &[Building], margin: f64) -> bldgen::enrichment::Block {
    let mut bb = bldgen::geom::Bbox::empty();
    for b in bs {
        bb.merge(&b.footprint().bbox());
    }
    let bb = bb.expanded(margin);
    let mut ids: Vec<u64> = bs.iter().map(|b| b.id()).collect();
    ids.sort_unstable();
    bldgen::enrichment::Block {
        id,
        footprint: Polygon::rect(bb.min.x, bb.min.y, bb.width(), bb.height()).unwrap(),
        building_ids: ids,
    }
}
