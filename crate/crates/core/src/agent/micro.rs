//! Building agent: constraints, actions and lifecycle.

use serde::{Deserialize, Serialize};

use super::search::lifecycle;
use super::{Action, AgentError, Constraint, ConstraintReport, ScaleSpec};
use crate::building::{Building, BuildingId};
use crate::geom::{min_bounding_rectangle, Point, Polygon, Ring};
use crate::morphology::remove_short_edges;
use crate::shape::ShapeMeasures;

/// Buildings whose initial squareness deviation is below this are treated
/// as meant to be rectilinear.
pub const NEAR_RECTILINEAR_DEG: f64 = 25.0;
/// Deviation at which squareness satisfaction reaches zero.
pub const SQUARENESS_SCALE_DEG: f64 = 15.0;

/// Scores `b` against the micro constraints. Shape constraints compare with
/// the measures the building started from.
pub fn evaluate_building(b: &Building, initial: &ShapeMeasures, s: &ScaleSpec) -> ConstraintReport {
    let m = b.measures();
    let size = (m.area / s.min_area()).min(1.0);
    let size_action = if m.area < s.elimination_area() {
        Action::Eliminate
    } else {
        Action::Enlarge { min_area: s.min_area() }
    };
    let gran = (m.shortest_edge / s.min_edge()).min(1.0);
    let square = if initial.squareness_dev < NEAR_RECTILINEAR_DEG {
        1.0 - (m.squareness_dev / SQUARENESS_SCALE_DEG).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let convex = 1.0 - (m.convexity - initial.convexity).abs();
    let elong = 1.0 - (m.elongation - initial.elongation).abs();
    ConstraintReport::new(vec![
        (Constraint::Size, size, vec![size_action]),
        (Constraint::Granularity, gran, vec![Action::SimplifyGranularity { min_edge: s.min_edge() }]),
        (Constraint::Squareness, square, vec![Action::Square { tol_deg: s.square_tol_deg }]),
        (Constraint::Convexity, convex, vec![]),
        (Constraint::Elongation, elong, vec![]),
    ])
}

/// Scales `b` about its centroid up to `min_area`. Larger buildings are
/// returned unchanged.
pub fn action_enlarge(b: &Building, min_area: f64) -> Result<Building, AgentError> {
    if !(min_area > 0.0) || !min_area.is_finite() {
        return Err(AgentError::InvalidParams(format!("min_area must be positive, got {min_area}")));
    }
    let area = b.area();
    if area >= min_area {
        return Ok(b.clone());
    }
    let k = (min_area / area).sqrt();
    let c = b.footprint().centroid();
    Ok(b.with_footprint(b.footprint().map_points(|p| c.add(p.sub(c).scale(k))))?)
}

pub fn action_simplify_granularity(b: &Building, min_edge: f64) -> Building {
    b.with_footprint(remove_short_edges(b.footprint(), min_edge)).unwrap_or_else(|_| b.clone())
}

/// Snaps edge directions to multiples of 45° in the frame of the minimum
/// bounding rectangle, for edges within `tol_deg` of one. Each run of edges
/// sharing a direction becomes one line and the outline is rebuilt from the
/// intersections of consecutive lines. Returns `b` unchanged when that
/// fails or yields an invalid ring.
pub fn action_square(b: &Building, tol_deg: f64) -> Building {
    square_polygon(b.footprint(), tol_deg)
        .and_then(|p| b.with_footprint(p).ok())
        .unwrap_or_else(|| b.clone())
}

fn square_polygon(p: &Polygon, tol_deg: f64) -> Option<Polygon> {
    let frame = min_bounding_rectangle(p).ok()?.angle.to_radians();
    let c = p.centroid();
    let ext = square_ring(p.exterior(), frame, c, tol_deg)?;
    let holes = p
        .holes()
        .iter()
        .map(|h| square_ring(h, frame, c, tol_deg))
        .collect::<Option<Vec<Ring>>>()?;
    let out = Polygon::new(ext, holes).ok()?;
    let ratio = out.area() / p.area();
    (out.is_valid() && (0.5..2.0).contains(&ratio)).then_some(out)
}

struct Line {
    theta: f64,
    anchor: Point,
    /// Index of the first original vertex of the run.
    start: usize,
}

fn square_ring(r: &Ring, frame: f64, c: Point, tol_deg: f64) -> Option<Ring> {
    let pts: Vec<Point> = r.vertices().iter().map(|p| p.sub(c).rotate(-frame)).collect();
    let n = pts.len();
    let dirs: Vec<f64> = (0..n)
        .map(|i| {
            let d = pts[(i + 1) % n].sub(pts[i]);
            let theta = d.y.atan2(d.x).to_degrees().rem_euclid(180.0);
            let target = (theta / 45.0).round() * 45.0;
            if (theta - target).abs() <= tol_deg {
                target % 180.0
            } else {
                theta
            }
        })
        .collect();
    let same = |a: f64, b: f64| {
        let d = (a - b).abs();
        d < 1e-9 || (180.0 - d) < 1e-9
    };
    let first = (0..n).find(|&i| !same(dirs[i], dirs[(i + n - 1) % n]))?;

    let mut lines: Vec<Line> = Vec::new();
    let mut k = 0;
    while k < n {
        let start = (first + k) % n;
        let theta = dirs[start];
        let (mut wsum, mut acc) = (0.0, Point::new(0.0, 0.0));
        while k < n && same(dirs[(first + k) % n], theta) {
            let i = (first + k) % n;
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let w = a.dist(b);
            acc = acc.add(a.lerp(b, 0.5).scale(w));
            wsum += w;
            k += 1;
        }
        if wsum <= 0.0 {
            return None;
        }
        lines.push(Line { theta, anchor: acc.scale(1.0 / wsum), start });
    }
    let m = lines.len();
    if m < 3 {
        return None;
    }
    let bb = crate::geom::Bbox::of_points(&pts);
    let reach = 0.25 * bb.width().hypot(bb.height());
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let (l1, l2) = (&lines[(k + m - 1) % m], &lines[k]);
        let d1 = Point::new(l1.theta.to_radians().cos(), l1.theta.to_radians().sin());
        let d2 = Point::new(l2.theta.to_radians().cos(), l2.theta.to_radians().sin());
        let den = d1.cross(d2);
        if den.abs() < 1f64.to_radians().sin() {
            return None;
        }
        let t = l2.anchor.sub(l1.anchor).cross(d2) / den;
        let v = l1.anchor.add(d1.scale(t));
        if v.dist(pts[l2.start]) > reach {
            return None;
        }
        out.push(v.rotate(frame).add(c));
    }
    Ring::new(out).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BuildingOutcome {
    Kept(Building),
    Eliminated { id: BuildingId, area: f64 },
}

impl BuildingOutcome {
    pub fn building(&self) -> Option<&Building> {
        match self {
            BuildingOutcome::Kept(b) => Some(b),
            BuildingOutcome::Eliminated { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroResult {
    pub outcome: BuildingOutcome,
    pub initial_aggregate: f64,
    pub final_aggregate: f64,
    pub states_visited: usize,
    pub report: ConstraintReport,
}

fn apply(b: &Option<Building>, a: &Action) -> Option<Option<Building>> {
    let b = b.as_ref()?;
    let next = match a {
        Action::Eliminate => return Some(None),
        Action::Enlarge { min_area } => action_enlarge(b, *min_area).ok()?,
        Action::SimplifyGranularity { min_edge } => action_simplify_granularity(b, *min_edge),
        Action::Square { tol_deg } => action_square(b, *tol_deg),
        _ => return None,
    };
    (next.footprint() != b.footprint()).then_some(Some(next))
}

/// Runs one building agent for at most `budget` states. Buildings below the
/// elimination area are dropped without search.
pub fn building_lifecycle(b: &Building, s: &ScaleSpec, budget: usize) -> MicroResult {
    let initial = *b.measures();
    let evaluate = |st: &Option<Building>| match st {
        Some(x) => evaluate_building(x, &initial, s),
        None => ConstraintReport::new(Vec::new()),
    };
    if b.area() < s.elimination_area() {
        let report = evaluate_building(b, &initial, s);
        return MicroResult {
            outcome: BuildingOutcome::Eliminated { id: b.id(), area: b.area() },
            initial_aggregate: report.aggregate,
            final_aggregate: report.aggregate,
            states_visited: 1,
            report,
        };
    }
    let res = lifecycle(Some(b.clone()), budget, evaluate, apply, |st| st.is_none());
    let mut report = res.best_report;
    let outcome = match res.best {
        Some(x) => {
            if report.satisfaction(Constraint::Size).is_some_and(|v| v < 1.0) {
                report.notes.push(format!(
                    "size unresolved: area {:.3} below {:.3}, no improving action",
                    x.area(),
                    s.min_area()
                ));
            }
            BuildingOutcome::Kept(x)
        }
        None => BuildingOutcome::Eliminated { id: b.id(), area: b.area() },
    };
    let final_aggregate = match outcome {
        BuildingOutcome::Kept(_) => report.aggregate,
        BuildingOutcome::Eliminated { .. } => res.initial_aggregate,
    };
    MicroResult {
        outcome,
        initial_aggregate: res.initial_aggregate,
        final_aggregate,
        states_visited: res.visited,
        report,
    }
}
