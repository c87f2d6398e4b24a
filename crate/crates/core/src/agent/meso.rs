//! Block agent: density, preservation and proximity over member buildings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::micro::{building_lifecycle, MicroResult};
use super::search::lifecycle;
use super::{Action, Budgets, Constraint, ConstraintReport, IdPair, ScaleSpec};
use crate::building::{Building, BuildingId};
use crate::enrichment::{Block, BlockId};
use crate::geom::{
    buffer_unchecked, difference, intersection, min_separation, union_unchecked, MultiPolygon, Point, Polygon,
    DEFAULT_ARC_SEGMENTS,
};

/// Pairs closer than this below the threshold count as conflicts.
const SEP_EPS: f64 = 1e-6;

fn too_close(a: &Building, b: &Building, sep: f64) -> bool {
    if a.footprint().bbox().distance(&b.footprint().bbox()) >= sep - SEP_EPS {
        return false;
    }
    min_separation(a.footprint(), b.footprint()) < sep - SEP_EPS
}

/// Conflicting pairs among `bs`, as index pairs in input order.
fn conflicts(bs: &[Building], sep: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..bs.len() {
        for j in i + 1..bs.len() {
            if too_close(&bs[i], &bs[j], sep) {
                out.push((i, j));
            }
        }
    }
    out
}

fn id_pair(a: &Building, b: &Building) -> IdPair {
    (a.id().min(b.id()), a.id().max(b.id()))
}

/// Scores a block state. `initial` are the members as given, `current` the
/// surviving geometries and `eliminated` the ids dropped so far.
pub fn evaluate_block(
    block: &Block,
    initial: &[Building],
    current: &[Building],
    eliminated: &[BuildingId],
    s: &ScaleSpec,
) -> ConstraintReport {
    let area = block.area();
    let d0 = initial.iter().map(Building::area).sum::<f64>() / area;
    let d1 = current.iter().map(Building::area).sum::<f64>() / area;
    let density = if d0 > 0.0 { 1.0 - ((d1 - d0) / d0).clamp(0.0, 1.0) } else { 1.0 };

    let big = s.big_area();
    let lost_big = initial.iter().any(|b| b.area() >= big && eliminated.contains(&b.id()));
    let preservation = if lost_big { 0.0 } else { 1.0 };

    let sep = s.min_separation();
    let n = current.len();
    let pairs = n * n.saturating_sub(1) / 2;
    let bad = conflicts(current, sep).len();
    let proximity = if pairs == 0 { 1.0 } else { 1.0 - bad as f64 / pairs as f64 };

    ConstraintReport::new(vec![
        (
            Constraint::Density,
            density,
            vec![Action::EliminateSmallest { among_conflicting: false }],
        ),
        (Constraint::Preservation, preservation, vec![]),
        (
            Constraint::Proximity,
            proximity,
            vec![
                Action::DisplaceMembers { sep },
                Action::EliminateSmallest { among_conflicting: true },
                Action::MergeOverlapping { sep },
            ],
        ),
    ])
}

fn outside_area(p: &Polygon, region: &MultiPolygon) -> f64 {
    difference(&p.clone().into(), region).area()
}

/// Extent of the overlap of `a` and `b` along `dir`.
fn overlap_depth(a: &Polygon, b: &Polygon, dir: Point) -> f64 {
    let inter = intersection(&a.clone().into(), &b.clone().into());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in inter.rings() {
        for v in r.vertices() {
            let t = v.dot(dir);
            lo = lo.min(t);
            hi = hi.max(t);
        }
    }
    if hi > lo {
        hi - lo
    } else {
        0.0
    }
}

/// Translates `b` by up to `step`, keeping it from sticking further out of
/// `region` than it already does. None if no useful move fits.
fn clamped_move(b: &Building, step: Point, region: &MultiPolygon) -> Option<Building> {
    let base = outside_area(b.footprint(), region);
    let fits = |lambda: f64| {
        let p = b.footprint().translate(step.x * lambda, step.y * lambda);
        (outside_area(&p, region) <= base + 1e-6).then_some(p)
    };
    if let Some(p) = fits(1.0) {
        return b.with_footprint(p).ok();
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        if fits(mid).is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo < 1e-3 {
        return None;
    }
    b.with_footprint(fits(lo)?).ok()
}

/// Pushes members apart until every pair is at least `sep` apart, moving
/// the smaller building of a conflicting pair away from the larger one
/// (the larger if the smaller cannot move). Moves never push a building
/// further outside the block. Returns the moved members and the pairs
/// still in conflict after `max_iters` sweeps.
pub fn displace_members(
    block: &Block,
    members: &[Building],
    sep: f64,
    max_iters: usize,
) -> (Vec<Building>, Vec<IdPair>) {
    let region: MultiPolygon = block.footprint.clone().into();
    let mut bs = members.to_vec();
    for _ in 0..max_iters {
        let pairs = conflicts(&bs, sep);
        if pairs.is_empty() {
            break;
        }
        let mut moved = false;
        for (i, j) in pairs {
            let cur = min_separation(bs[i].footprint(), bs[j].footprint());
            if cur >= sep - SEP_EPS {
                continue;
            }
            let (small, large) = if bs[i].area() < bs[j].area() || (bs[i].area() == bs[j].area() && bs[i].id() > bs[j].id())
            {
                (i, j)
            } else {
                (j, i)
            };
            for (mover, anchor) in [(small, large), (large, small)] {
                let delta = bs[mover].footprint().centroid().sub(bs[anchor].footprint().centroid());
                let dir = if delta.norm() > 1e-9 { delta.scale(1.0 / delta.norm()) } else { Point::new(1.0, 0.0) };
                let depth = if cur == 0.0 { overlap_depth(bs[mover].footprint(), bs[anchor].footprint(), dir) } else { 0.0 };
                let step = dir.scale(sep - cur + depth + SEP_EPS);
                if let Some(nb) = clamped_move(&bs[mover], step, &region) {
                    bs[mover] = nb;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            break;
        }
    }
    let unresolved = conflicts(&bs, sep).into_iter().map(|(i, j)| id_pair(&bs[i], &bs[j])).collect();
    (bs, unresolved)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemberFate {
    Kept,
    /// Dropped by its own agent for being too small.
    EliminatedMicro,
    /// Dropped by the block agent.
    EliminatedMeso,
    Merged { into: BuildingId },
}

#[derive(Debug, Clone)]
struct BlockState {
    /// Surviving buildings, ascending id.
    alive: Vec<Building>,
    fates: BTreeMap<BuildingId, MemberFate>,
}

impl BlockState {
    fn eliminated(&self) -> Vec<BuildingId> {
        self.fates
            .iter()
            .filter(|(_, f)| matches!(f, MemberFate::EliminatedMicro | MemberFate::EliminatedMeso))
            .map(|(id, _)| *id)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedBlock {
    pub block_id: BlockId,
    /// Surviving buildings, ascending id.
    pub buildings: Vec<Building>,
    pub fates: BTreeMap<BuildingId, MemberFate>,
    pub micro: Vec<MicroResult>,
    pub initial_aggregate: f64,
    /// Block satisfaction once every building agent has finished.
    pub phase1_aggregate: f64,
    pub final_aggregate: f64,
    pub meso_states_visited: usize,
    /// Pairs still closer than the separation threshold.
    pub unresolved: Vec<IdPair>,
    pub report: ConstraintReport,
}

fn smallest(st: &BlockState, among_conflicting: bool, s: &ScaleSpec, initial: &BTreeMap<BuildingId, f64>) -> Option<usize> {
    let big = s.big_area();
    let in_conflict: Vec<bool> = if among_conflicting {
        let mut v = vec![false; st.alive.len()];
        for (i, j) in conflicts(&st.alive, s.min_separation()) {
            v[i] = true;
            v[j] = true;
        }
        v
    } else {
        vec![true; st.alive.len()]
    };
    st.alive
        .iter()
        .enumerate()
        .filter(|(i, b)| {
            in_conflict[*i] && b.area() < big && initial.get(&b.id()).is_none_or(|a| *a < big)
        })
        .min_by(|(_, a), (_, b)| {
            let (x, y) = (a.area(), b.area());
            let tie = (x - y).abs() <= 1e-9 * x.max(y);
            if tie {
                a.id().cmp(&b.id())
            } else {
                x.total_cmp(&y)
            }
        })
        .map(|(i, _)| i)
}

/// Fuses each connected group of conflicting members by closing their
/// union with half the separation. The largest member names the result.
fn merge_conflicting(st: &BlockState, sep: f64) -> Option<BlockState> {
    let n = st.alive.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for (i, j) in conflicts(&st.alive, sep) {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        parent[a.max(b)] = a.min(b);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut next = st.clone();
    let mut alive: Vec<Building> = Vec::new();
    let mut changed = false;
    for g in groups.values() {
        if g.len() == 1 {
            alive.push(st.alive[g[0]].clone());
            continue;
        }
        let u = union_unchecked(g.iter().map(|&i| st.alive[i].footprint()));
        let r = 0.5 * sep + SEP_EPS;
        let closed = buffer_unchecked(&buffer_unchecked(&u, r, DEFAULT_ARC_SEGMENTS), -r, DEFAULT_ARC_SEGMENTS);
        let keeper = g
            .iter()
            .map(|&i| &st.alive[i])
            .max_by(|a, b| a.area().total_cmp(&b.area()).then(b.id().cmp(&a.id())))
            .unwrap();
        let merged = (closed.len() == 1)
            .then(|| keeper.with_footprint(closed.parts()[0].clone()).ok())
            .flatten();
        match merged {
            Some(m) => {
                for &i in g {
                    let id = st.alive[i].id();
                    if id != m.id() {
                        next.fates.insert(id, MemberFate::Merged { into: m.id() });
                    }
                }
                alive.push(m);
                changed = true;
            }
            None => alive.extend(g.iter().map(|&i| st.alive[i].clone())),
        }
    }
    alive.sort_by_key(Building::id);
    next.alive = alive;
    changed.then_some(next)
}

/// Generalizes one block: every member runs its own lifecycle first, then
/// the block agent searches over displacement, elimination and merging.
/// `members` are the block's buildings in any order.
pub fn block_lifecycle(block: &Block, members: &[Building], s: &ScaleSpec, budgets: &Budgets) -> GeneralizedBlock {
    let mut initial: Vec<Building> = members.to_vec();
    initial.sort_by_key(Building::id);
    let initial_area: BTreeMap<BuildingId, f64> = initial.iter().map(|b| (b.id(), b.area())).collect();
    let initial_aggregate = evaluate_block(block, &initial, &initial, &[], s).aggregate;

    let micro: Vec<MicroResult> = initial.iter().map(|b| building_lifecycle(b, s, budgets.micro)).collect();
    let mut st = BlockState { alive: Vec::new(), fates: BTreeMap::new() };
    for r in &micro {
        match &r.outcome {
            super::BuildingOutcome::Kept(b) => {
                st.fates.insert(b.id(), MemberFate::Kept);
                st.alive.push(b.clone());
            }
            super::BuildingOutcome::Eliminated { id, .. } => {
                st.fates.insert(*id, MemberFate::EliminatedMicro);
            }
        }
    }

    let evaluate = |x: &BlockState| evaluate_block(block, &initial, &x.alive, &x.eliminated(), s);
    let phase1_aggregate = evaluate(&st).aggregate;
    let apply = |x: &BlockState, a: &Action| -> Option<BlockState> {
        match a {
            Action::DisplaceMembers { sep } => {
                let (moved, _) = displace_members(block, &x.alive, *sep, budgets.displace_iters);
                let changed = moved.iter().zip(&x.alive).any(|(m, o)| m.footprint() != o.footprint());
                changed.then(|| BlockState { alive: moved, fates: x.fates.clone() })
            }
            Action::EliminateSmallest { among_conflicting } => {
                let i = smallest(x, *among_conflicting, s, &initial_area)?;
                let mut next = x.clone();
                let gone = next.alive.remove(i);
                next.fates.insert(gone.id(), MemberFate::EliminatedMeso);
                Some(next)
            }
            Action::MergeOverlapping { sep } => merge_conflicting(x, *sep),
            _ => None,
        }
    };
    let res = lifecycle(st, budgets.meso, evaluate, apply, |_| false);
    let best = res.best;
    let unresolved =
        conflicts(&best.alive, s.min_separation()).into_iter().map(|(i, j)| id_pair(&best.alive[i], &best.alive[j])).collect();
    let mut report = res.best_report;
    if res.visited >= budgets.meso {
        report.notes.push(format!("meso budget of {} states exhausted", budgets.meso));
    }
    GeneralizedBlock {
        block_id: block.id,
        buildings: best.alive,
        fates: best.fates,
        micro,
        initial_aggregate,
        phase1_aggregate,
        final_aggregate: report.aggregate,
        meso_states_visited: res.visited,
        unresolved,
        report,
    }
}
