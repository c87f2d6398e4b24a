//! Grid morphology used as a brute-force reference for the vector pipeline.
//!
//! Cells are occupied when their centre lies inside a polygon. Dilation and
//! erosion use the exact Euclidean distance transform, so the structuring
//! element is the set of cells whose centres lie within `r` of the origin.

use crate::building::Building;
use crate::geom::{Bbox, MultiPolygon, Point, Polygon};

use super::MorphologyError;

/// Largest grid the oracle will allocate.
/// Threshold slack, in cells, for centre-to-centre distances.
const CENTRE_SLACK: f64 = 0.2;

pub const MAX_CELLS: usize = 64_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    origin: Point,
    cell: f64,
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl RasterGrid {
    pub fn new(origin: Point, cell: f64, width: usize, height: usize) -> Result<RasterGrid, MorphologyError> {
        if !(cell > 0.0) {
            return Err(MorphologyError::InvalidParams(format!("cell size {cell} must be positive")));
        }
        let cells = width.checked_mul(height).filter(|&c| c <= MAX_CELLS).ok_or(
            MorphologyError::Capacity { width, height, max: MAX_CELLS },
        )?;
        Ok(RasterGrid { origin, cell, width, height, bits: vec![false; cells] })
    }

    /// Grid covering `bbox` grown by `pad`, aligned to multiples of `cell`.
    pub fn covering(bbox: &Bbox, pad: f64, cell: f64) -> Result<RasterGrid, MorphologyError> {
        let bb = bbox.expanded(pad);
        let x0 = (bb.min.x / cell).floor() * cell;
        let y0 = (bb.min.y / cell).floor() * cell;
        let width = ((bb.max.x - x0) / cell).ceil() as usize + 1;
        let height = ((bb.max.y - y0) / cell).ceil() as usize + 1;
        RasterGrid::new(Point::new(x0, y0), cell, width, height)
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.bits[iy * self.width + ix]
    }

    pub fn set(&mut self, ix: usize, iy: usize, v: bool) {
        self.bits[iy * self.width + ix] = v;
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.cell,
            self.origin.y + (iy as f64 + 0.5) * self.cell,
        )
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn occupied_area(&self) -> f64 {
        self.popcount() as f64 * self.cell * self.cell
    }

    fn empty_like(&self) -> RasterGrid {
        RasterGrid { bits: vec![false; self.bits.len()], ..self.clone() }
    }

    /// Marks cells whose centres fall inside `p` (even-odd over its rings).
    pub fn fill_polygon(&mut self, p: &Polygon) {
        let bb = p.bbox();
        let row_lo = (((bb.min.y - self.origin.y) / self.cell) - 0.5).ceil().max(0.0) as usize;
        let row_hi = (((bb.max.y - self.origin.y) / self.cell) - 0.5).floor();
        if row_hi < 0.0 {
            return;
        }
        let row_hi = (row_hi as usize).min(self.height.saturating_sub(1));
        let mut xs: Vec<f64> = Vec::new();
        for iy in row_lo..=row_hi {
            let y = self.origin.y + (iy as f64 + 0.5) * self.cell;
            xs.clear();
            for ring in p.rings() {
                for (a, b) in ring.edges() {
                    if (a.y > y) != (b.y > y) {
                        xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                let lo = ((pair[0] - self.origin.x) / self.cell - 0.5).ceil().max(0.0);
                let hi = ((pair[1] - self.origin.x) / self.cell - 0.5).ceil();
                let (lo, hi) = (lo as usize, (hi.max(0.0) as usize).min(self.width));
                for ix in lo..hi {
                    self.bits[iy * self.width + ix] = true;
                }
            }
        }
    }

    /// Same frame as `self`, with the cells covered by `mp`.
    pub fn rasterize_like(&self, mp: &MultiPolygon) -> RasterGrid {
        let mut g = self.empty_like();
        for p in mp.parts() {
            g.fill_polygon(p);
        }
        g
    }

    pub fn complement(&self) -> RasterGrid {
        RasterGrid { bits: self.bits.iter().map(|b| !b).collect(), ..self.clone() }
    }

    /// Cells within `r` of the occupied region.
    ///
    /// Distances run between cell centres, which sit inside the true
    /// boundary; along a slanted edge a disc of radius `r` must sink a cap of
    /// roughly one cell's area into the region before it meets a centre, about
    /// 0.2 cells at the radii used here. That slack is added to the
    /// threshold. Axis-aligned edges are unaffected since their distances are
    /// whole cells.
    pub fn dilate(&self, r: f64) -> RasterGrid {
        let sq = squared_distance_transform(&self.bits, self.width, self.height);
        let rr = (r / self.cell + CENTRE_SLACK).powi(2);
        RasterGrid { bits: sq.iter().map(|&d| d <= rr).collect(), ..self.clone() }
    }

    /// Cells whose whole `r`-neighbourhood is occupied. Cells beyond the
    /// grid count as empty.
    pub fn erode(&self, r: f64) -> RasterGrid {
        self.complement().dilate(r).complement()
    }

    pub fn close(&self, r: f64) -> RasterGrid {
        self.dilate(r).erode(r)
    }

    pub fn open(&self, r: f64) -> RasterGrid {
        self.erode(r).dilate(r)
    }

    /// Fills enclosed empty regions (4-connected, not touching the grid
    /// border) smaller than `min_area`.
    pub fn fill_holes(&self, min_area: f64) -> RasterGrid {
        let (w, h) = (self.width, self.height);
        let max_cells = (min_area / (self.cell * self.cell)).ceil() as usize;
        let mut out = self.clone();
        let mut seen = vec![false; self.bits.len()];
        let mut stack = Vec::new();
        let mut region = Vec::new();
        for start in 0..self.bits.len() {
            if self.bits[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            region.clear();
            let mut touches_border = false;
            while let Some(idx) = stack.pop() {
                region.push(idx);
                let (x, y) = (idx % w, idx / w);
                if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                    touches_border = true;
                }
                let mut visit = |n: usize| {
                    if !self.bits[n] && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                };
                if x > 0 {
                    visit(idx - 1);
                }
                if x + 1 < w {
                    visit(idx + 1);
                }
                if y > 0 {
                    visit(idx - w);
                }
                if y + 1 < h {
                    visit(idx + w);
                }
            }
            if !touches_border && region.len() < max_cells {
                for &i in &region {
                    out.bits[i] = true;
                }
            }
        }
        out
    }

    /// Number of 8-connected occupied components.
    pub fn component_count(&self) -> usize {
        let (w, h) = (self.width, self.height);
        let mut seen = vec![false; self.bits.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.bits.len() {
            if !self.bits[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (x, y) = ((idx % w) as isize, (idx / w) as isize);
                for dy in -1..=1isize {
                    for dx in -1..=1isize {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let n = ny as usize * w + nx as usize;
                        if self.bits[n] && !seen[n] {
                            seen[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
        }
        count
    }

    /// Cells set in exactly one of the two grids. Frames must match.
    pub fn xor_count(&self, other: &RasterGrid) -> usize {
        assert_eq!((self.width, self.height), (other.width, other.height), "grid frames differ");
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }

    pub fn xor_area(&self, other: &RasterGrid) -> f64 {
        self.xor_count(other) as f64 * self.cell * self.cell
    }

    pub fn or_count(&self, other: &RasterGrid) -> usize {
        assert_eq!((self.width, self.height), (other.width, other.height), "grid frames differ");
        self.bits.iter().zip(&other.bits).filter(|(a, b)| **a || **b).count()
    }
}

/// Stand-in for "no occupied cell"; larger than any squared in-grid distance.
const FAR: f64 = 1e18;

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas).
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let inter = |q: usize, p: usize| {
        ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64))
    };
    for q in 1..n {
        let mut s = inter(q, v[k]);
        while s <= z[k] {
            if k == 0 {
                break;
            }
            k -= 1;
            s = inter(q, v[k]);
        }
        if s <= z[k] {
            // Replaces the only parabola left.
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Squared Euclidean distance (in cells) from every cell to the nearest set cell.
fn squared_distance_transform(bits: &[bool], w: usize, h: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = bits.iter().map(|&b| if b { 0.0 } else { FAR }).collect();
    let m = w.max(h);
    let mut f = vec![0.0; m];
    let mut out = vec![0.0; m];
    let mut v = vec![0usize; m];
    let mut z = vec![0.0; m + 1];
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        dt_1d(&f[..h], &mut out[..h], &mut v[..h], &mut z[..h + 1]);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        let row = &mut grid[y * w..(y + 1) * w];
        f[..w].copy_from_slice(row);
        dt_1d(&f[..w], &mut out[..w], &mut v[..w], &mut z[..w + 1]);
        row.copy_from_slice(&out[..w]);
    }
    grid
}

/// Rasterizes `scene` on a grid with room for radius-`r` operators.
pub fn rasterize_scene(scene: &MultiPolygon, r: f64, cell: f64) -> Result<RasterGrid, MorphologyError> {
    let bbox = if scene.is_empty() { Bbox::of_points(&[Point::new(0.0, 0.0)]) } else { scene.bbox() };
    let mut grid = RasterGrid::covering(&bbox, 2.0 * r + 4.0 * cell, cell)?;
    for p in scene.parts() {
        grid.fill_polygon(p);
    }
    Ok(grid)
}

/// Closure followed by opening of the rasterized buildings, with enclosed
/// gaps smaller than the disc (`pi r^2`) filled in between, as the vector
/// merge does.
pub fn raster_morphology_oracle(buildings: &[Building], r: f64, cell: f64) -> Result<RasterGrid, MorphologyError> {
    if !(r > 0.0) || !(cell > 0.0) || cell > r / 10.0 + 1e-12 {
        return Err(MorphologyError::InvalidParams(format!(
            "oracle needs r > 0 and 0 < cell <= r/10 (r = {r}, cell = {cell})"
        )));
    }
    let scene = crate::building::footprints(buildings);
    let grid = rasterize_scene(&scene, r, cell)?;
    let closed = grid.close(r).fill_holes(std::f64::consts::PI * r * r);
    Ok(closed.open(r))
}
