//! Best-first lifecycle shared by building and block agents.

use super::{Action, ConstraintReport};

struct Node<S> {
    state: S,
    report: ConstraintReport,
    next: usize,
}

pub(crate) struct SearchResult<S> {
    pub best: S,
    pub best_report: ConstraintReport,
    pub initial_aggregate: f64,
    pub visited: usize,
}

/// Depth-first descent with backtracking. From the current state the
/// proposals are tried in order; a child is entered only if its aggregate
/// is strictly higher, otherwise the next proposal is tried, and an
/// exhausted state hands control back to its parent. Stops on perfect
/// satisfaction, exhaustion, a terminal state, or after `budget` states.
pub(crate) fn lifecycle<S: Clone>(
    root: S,
    budget: usize,
    evaluate: impl Fn(&S) -> ConstraintReport,
    apply: impl Fn(&S, &Action) -> Option<S>,
    terminal: impl Fn(&S) -> bool,
) -> SearchResult<S> {
    let report = evaluate(&root);
    let initial_aggregate = report.aggregate;
    let mut best = (root.clone(), report.clone());
    let mut stack = vec![Node { state: root, report, next: 0 }];
    let mut visited = 1;

    while let Some(top) = stack.last_mut() {
        if top.report.is_perfect() || visited >= budget.max(1) {
            break;
        }
        let Some(action) = top.report.proposals.get(top.next).cloned() else {
            stack.pop();
            continue;
        };
        top.next += 1;
        let Some(child) = apply(&top.state, &action) else {
            continue;
        };
        visited += 1;
        if terminal(&child) {
            let r = evaluate(&child);
            best = (child, r);
            break;
        }
        let r = evaluate(&child);
        if r.aggregate > top.report.aggregate {
            if r.aggregate > best.1.aggregate {
                best = (child.clone(), r.clone());
            }
            stack.push(Node { state: child, report: r, next: 0 });
        }
    }
    SearchResult { best: best.0, best_report: best.1, initial_aggregate, visited }
}
