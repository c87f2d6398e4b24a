//! Constraint-driven generalization: building (micro) agents nested in
//! block (meso) agents. Each agent searches for a state that better
//! satisfies its constraints; blocks act only after their buildings.

mod meso;
mod micro;
mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::building::BuildingId;
use crate::geom::GeomError;

pub use meso::{block_lifecycle, displace_members, evaluate_block, GeneralizedBlock, MemberFate};
pub use micro::{
    action_enlarge, action_simplify_granularity, action_square, building_lifecycle, evaluate_building,
    BuildingOutcome, MicroResult, NEAR_RECTILINEAR_DEG, SQUARENESS_SCALE_DEG,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("invalid agent parameters: {0}")]
    InvalidParams(String),
}

/// Target scale and the legibility thresholds it implies. Map quantities
/// are in millimetres on paper and converted to ground metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScaleSpec {
    pub scale_denominator: u32,
    pub min_area_mm2: f64,
    pub min_edge_mm: f64,
    pub min_separation_mm: f64,
    /// Buildings below this fraction of the minimum area are dropped.
    pub elimination_ratio: f64,
    /// Buildings at least this many minimum areas large are never dropped.
    pub big_factor: f64,
    /// Edges within this angle of a multiple of 45° are squared.
    pub square_tol_deg: f64,
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec::new(25_000)
    }
}

impl ScaleSpec {
    pub fn new(scale_denominator: u32) -> ScaleSpec {
        ScaleSpec {
            scale_denominator,
            min_area_mm2: 0.4,
            min_edge_mm: 0.3,
            min_separation_mm: 0.2,
            elimination_ratio: 0.4,
            big_factor: 5.0,
            square_tol_deg: 15.0,
        }
    }

    /// Ground metres for `mm` on the map.
    pub fn ground(&self, mm: f64) -> f64 {
        mm * self.scale_denominator as f64 / 1000.0
    }

    pub fn min_area(&self) -> f64 {
        self.min_area_mm2 * (self.scale_denominator as f64 / 1000.0).powi(2)
    }

    pub fn min_edge(&self) -> f64 {
        self.ground(self.min_edge_mm)
    }

    pub fn min_separation(&self) -> f64 {
        self.ground(self.min_separation_mm)
    }

    pub fn elimination_area(&self) -> f64 {
        self.elimination_ratio * self.min_area()
    }

    pub fn big_area(&self) -> f64 {
        self.big_factor * self.min_area()
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let positive = [
            ("min_area_mm2", self.min_area_mm2),
            ("min_edge_mm", self.min_edge_mm),
            ("min_separation_mm", self.min_separation_mm),
            ("elimination_ratio", self.elimination_ratio),
            ("big_factor", self.big_factor),
            ("square_tol_deg", self.square_tol_deg),
        ];
        if self.scale_denominator == 0 {
            return Err(AgentError::InvalidParams("scale_denominator must be positive".into()));
        }
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(AgentError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if self.elimination_ratio >= 1.0 {
            return Err(AgentError::InvalidParams(format!(
                "elimination_ratio must be below 1, got {}",
                self.elimination_ratio
            )));
        }
        if self.square_tol_deg >= 22.5 {
            return Err(AgentError::InvalidParams("square_tol_deg must be below 22.5".into()));
        }
        Ok(())
    }
}

/// Node budgets of the two lifecycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub micro: usize,
    pub meso: usize,
    /// Relaxation sweeps per displacement action.
    pub displace_iters: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { micro: 30, meso: 50, displace_iters: 25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constraint {
    Size,
    Granularity,
    Squareness,
    Convexity,
    Elongation,
    Density,
    Preservation,
    Proximity,
}

impl Constraint {
    pub fn importance(self) -> f64 {
        match self {
            Constraint::Size => 3.0,
            Constraint::Granularity => 2.0,
            Constraint::Squareness | Constraint::Convexity | Constraint::Elongation => 1.0,
            Constraint::Density => 2.0,
            Constraint::Preservation | Constraint::Proximity => 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    Enlarge { min_area: f64 },
    SimplifyGranularity { min_edge: f64 },
    Square { tol_deg: f64 },
    Eliminate,
    DisplaceMembers { sep: f64 },
    /// Drop the smallest member that is not big, either among members in a
    /// proximity conflict or among all members.
    EliminateSmallest { among_conflicting: bool },
    MergeOverlapping { sep: f64 },
}

impl Action {
    pub fn is_meso(&self) -> bool {
        matches!(
            self,
            Action::DisplaceMembers { .. } | Action::EliminateSmallest { .. } | Action::MergeOverlapping { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Satisfaction {
    pub constraint: Constraint,
    /// In [0, 1].
    pub value: f64,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub satisfactions: Vec<Satisfaction>,
    /// Importance-weighted mean of the satisfactions.
    pub aggregate: f64,
    /// Most important, least satisfied first.
    pub proposals: Vec<Action>,
    pub notes: Vec<String>,
}

impl ConstraintReport {
    /// Builds a report from satisfactions in constraint order and the
    /// actions each unsatisfied constraint proposes.
    pub(crate) fn new(mut entries: Vec<(Constraint, f64, Vec<Action>)>) -> ConstraintReport {
        for e in &mut entries {
            e.1 = if e.1 >= 1.0 - SATISFIED_EPS { 1.0 } else { e.1.clamp(0.0, 1.0) };
        }
        let total: f64 = entries.iter().map(|(c, _, _)| c.importance()).sum();
        let aggregate = if total > 0.0 {
            (entries.iter().map(|(c, v, _)| c.importance() * v).sum::<f64>() / total).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let mut ranked: Vec<&(Constraint, f64, Vec<Action>)> = entries.iter().filter(|(_, v, _)| *v < 1.0).collect();
        ranked.sort_by(|a, b| {
            b.0.importance()
                .total_cmp(&a.0.importance())
                .then((1.0 - b.1).total_cmp(&(1.0 - a.1)))
                .then(a.0.cmp(&b.0))
        });
        let mut proposals: Vec<Action> = Vec::new();
        for (_, _, actions) in ranked {
            for a in actions {
                if !proposals.contains(a) {
                    proposals.push(a.clone());
                }
            }
        }
        ConstraintReport {
            satisfactions: entries
                .iter()
                .map(|(c, v, _)| Satisfaction { constraint: *c, value: *v, importance: c.importance() })
                .collect(),
            aggregate,
            proposals,
            notes: Vec::new(),
        }
    }

    pub fn satisfaction(&self, c: Constraint) -> Option<f64> {
        self.satisfactions.iter().find(|s| s.constraint == c).map(|s| s.value)
    }

    pub fn is_perfect(&self) -> bool {
        self.aggregate >= 1.0
    }
}

/// Satisfactions this close to 1 count as fully satisfied, so rounding in
/// scaled areas does not keep an agent busy.
const SATISFIED_EPS: f64 = 1e-9;

/// Unordered pair of building ids, smaller first.
pub type IdPair = (BuildingId, BuildingId);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_at_25k_and_50k() {
        let s = ScaleSpec::new(25_000);
        assert!((s.min_area() - 250.0).abs() < 1e-9);
        assert!((s.min_edge() - 7.5).abs() < 1e-9);
        assert!((s.min_separation() - 5.0).abs() < 1e-9);
        assert!((s.elimination_area() - 100.0).abs() < 1e-9);
        assert!((s.big_area() - 1250.0).abs() < 1e-9);
        let s = ScaleSpec::new(50_000);
        assert!((s.min_area() - 1000.0).abs() < 1e-9);
        assert!((s.min_edge() - 15.0).abs() < 1e-9);
        assert!((s.min_separation() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_specs() {
        let mut s = ScaleSpec::default();
        s.elimination_ratio = 1.0;
        assert!(s.validate().is_err());
        let mut s = ScaleSpec::default();
        s.min_edge_mm = 0.0;
        assert!(s.validate().is_err());
        assert!(ScaleSpec::new(0).validate().is_err());
    }

    #[test]
    fn report_orders_by_importance_then_unsatisfaction() {
        let r = ConstraintReport::new(vec![
            (Constraint::Size, 0.9, vec![Action::Enlarge { min_area: 1.0 }]),
            (Constraint::Granularity, 0.1, vec![Action::SimplifyGranularity { min_edge: 1.0 }]),
            (Constraint::Squareness, 0.5, vec![Action::Square { tol_deg: 15.0 }]),
            (Constraint::Convexity, 1.0, vec![]),
            (Constraint::Elongation, 1.0, vec![]),
        ]);
        assert_eq!(
            r.proposals,
            vec![
                Action::Enlarge { min_area: 1.0 },
                Action::SimplifyGranularity { min_edge: 1.0 },
                Action::Square { tol_deg: 15.0 }
            ]
        );
        let want = (3.0 * 0.9 + 2.0 * 0.1 + 0.5 + 1.0 + 1.0) / 8.0;
        assert!((r.aggregate - want).abs() < 1e-12);
    }
}
