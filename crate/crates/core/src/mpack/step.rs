//! One rolling-horizon step: joint solve, shrink the look-ahead on failure,
//! fall back to single boxes, and finally rotate a bin.

use crate::bin::{BinState, RobotConfig};
use crate::error::{Error, Result};
use crate::geometry::BoxDims;
use crate::opack::{boxpack_select, Candidate, SelectionRule, StepOutcome, Weights};
use crate::sim::BinManager;

use super::search::{solve_joint_exact, JointResult, SearchOptions};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MpackStats {
    /// Times the look-ahead was shortened by dropping its farthest box.
    pub shrinks: usize,
    /// Joint solves stopped by the node budget.
    pub budget_exhausted: usize,
    pub solves: usize,
}

fn select(bins: &[BinState], result: &JointResult, cfg: &RobotConfig, w: &Weights, rule: SelectionRule, offset: Option<usize>) -> Option<Candidate> {
    let sol = result.solution()?;
    let candidates: Vec<Candidate> = sol
        .placements
        .iter()
        .map(|(pos, placement)| Candidate { position: offset.unwrap_or(*pos), placement: *placement })
        .collect();
    boxpack_select(bins, &candidates, cfg, w, rule)
}

/// Decides a pick against the current open bins without touching them.
pub fn mpack_decide(
    bins: &[BinState],
    window: &[BoxDims],
    cfg: &RobotConfig,
    w: &Weights,
    opts: SearchOptions,
    rule: SelectionRule,
) -> (StepOutcome, MpackStats) {
    let mut stats = MpackStats::default();
    let solve = |window: &[BoxDims], stats: &mut MpackStats| {
        let r = solve_joint_exact(bins, window, cfg, w, opts);
        stats.solves += 1;
        if matches!(r, JointResult::BudgetExhausted { .. }) {
            stats.budget_exhausted += 1;
        }
        r
    };
    let mut len = window.len();
    while len > 1 {
        let r = solve(&window[..len], &mut stats);
        if let Some(c) = select(bins, &r, cfg, w, rule, None) {
            return (StepOutcome::Placed { position: c.position, placement: c.placement }, stats);
        }
        len -= 1;
        stats.shrinks += 1;
    }
    let mut singles = Vec::new();
    for (pos, item) in window.iter().enumerate() {
        let r = solve(std::slice::from_ref(item), &mut stats);
        if let Some(c) = select(bins, &r, cfg, w, rule, Some(pos)) {
            singles.push(c);
        }
    }
    match boxpack_select(bins, &singles, cfg, w, rule) {
        Some(c) => (StepOutcome::Placed { position: c.position, placement: c.placement }, stats),
        None => (StepOutcome::Exhausted, stats),
    }
}

/// A committed rolling-horizon decision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpackDecision {
    pub position: usize,
    pub placement: crate::geometry::Placement,
    pub bins_rotated: usize,
    pub stats: MpackStats,
}

/// Decides and commits one box, closing the fullest bin and opening a fresh
/// one whenever no visible box fits the open bins.
pub fn mpack_step(
    manager: &mut BinManager,
    window: &[BoxDims],
    cfg: &RobotConfig,
    w: &Weights,
    opts: SearchOptions,
    rule: SelectionRule,
) -> Result<MpackDecision> {
    let mut rotated = 0;
    let mut total = MpackStats::default();
    loop {
        let (outcome, stats) = mpack_decide(manager.open(), window, cfg, w, opts, rule);
        total.shrinks += stats.shrinks;
        total.budget_exhausted += stats.budget_exhausted;
        total.solves += stats.solves;
        match outcome {
            StepOutcome::Placed { position, placement } => {
                manager.commit(placement);
                return Ok(MpackDecision { position, placement, bins_rotated: rotated, stats: total });
            }
            StepOutcome::Exhausted => {
                if manager.open().iter().all(|b| b.is_empty()) {
                    return Err(Error::Protocol("no look-ahead box fits an empty bin".into()));
                }
                manager.close_fullest_and_open();
                rotated += 1;
            }
        }
    }
}
