//! Exact joint placement of all look-ahead boxes by depth-first branch and bound.
//!
//! Boxes are added in non-decreasing order of base height (ties by window
//! index). Every stable arrangement can be built that way, because a box only
//! rests on boxes whose tops are at its base, so checking support
//! incrementally is exact. Lateral contact can be created by later boxes and
//! is checked once the arrangement is complete.

use serde::{Deserialize, Serialize};

use crate::bin::{BinState, RobotConfig};
use crate::feasibility::cep_contacts;
use crate::geometry::{BoxDims, Placement};
use crate::heuristics::{candidate_points, distinct_orientations, pose_ok, CandidateMode};
use crate::opack::{score, Weights};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Placements for every look-ahead box, with the summed objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSolution {
    /// `(conveyor position, placement)` in conveyor order.
    pub placements: Vec<(usize, Placement)>,
    pub objective_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum JointResult {
    Solved(JointSolution),
    Infeasible,
    /// The node budget ran out; `best` is the incumbent, if any.
    BudgetExhausted { best: Option<JointSolution>, nodes: u64 },
}

impl JointResult {
    pub fn solution(&self) -> Option<&JointSolution> {
        match self {
            JointResult::Solved(s) => Some(s),
            JointResult::BudgetExhausted { best, .. } => best.as_ref(),
            JointResult::Infeasible => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub mode: CandidateMode,
    pub node_budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { mode: CandidateMode::Extreme, node_budget: DEFAULT_NODE_BUDGET }
    }
}

struct Child {
    score: f64,
    item: usize,
    placement: Placement,
}

struct Search<'a> {
    window: &'a [BoxDims],
    cfg: RobotConfig,
    weights: Weights,
    mode: CandidateMode,
    bins: Vec<BinState>,
    orientations: Vec<Vec<(crate::geometry::Orientation, [u32; 3])>>,
    /// `twin[i]` is the nearest index `< i` with identical sides, if any.
    twin: Vec<Option<usize>>,
    lower_bound: Vec<f64>,
    placed: Vec<Option<Placement>>,
    best: Option<(f64, Vec<Placement>)>,
    nodes: u64,
    budget: u64,
    require_cep: bool,
}

impl Search<'_> {
    fn bin_pos(&self, index: usize) -> usize {
        self.bins.iter().position(|b| b.index == index).expect("open bin")
    }

    /// Returns false once the node budget is exhausted.
    fn dfs(&mut self, objective: f64, last: Option<(u32, usize)>) -> bool {
        let open: Vec<usize> = (0..self.window.len()).filter(|i| self.placed[*i].is_none()).collect();
        if open.is_empty() {
            self.leaf(objective);
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let rest: f64 = open.iter().map(|i| self.lower_bound[*i]).sum();
        let mut children = Vec::new();
        let mut bins_sorted: Vec<usize> = (0..self.bins.len()).collect();
        bins_sorted.sort_by_key(|k| self.bins[*k].index);
        for k in bins_sorted {
            let bin = &self.bins[k];
            let points = candidate_points(bin, self.mode);
            for &i in &open {
                if self.twin[i].is_some_and(|t| self.placed[t].is_none()) {
                    continue;
                }
                for c in &points {
                    if last.is_some_and(|l| (c.point[2], i) <= l) {
                        continue;
                    }
                    for (o, ext) in &self.orientations[i] {
                        if pose_ok(bin, c.point, *ext, &self.cfg) {
                            let placement = Placement::new(self.window[i], bin.index, c.point, *o);
                            children.push(Child { score: score(&placement, &self.weights), item: i, placement });
                        }
                    }
                }
            }
        }
        children.sort_by(|a, b| {
            a.score.total_cmp(&b.score).then(a.item.cmp(&b.item)).then_with(|| {
                let key = |p: &Placement| (p.bin_index, p.corner[2], p.corner[1], p.corner[0], p.orientation);
                key(&a.placement).cmp(&key(&b.placement))
            })
        });
        for child in children {
            let bound = objective + child.score + rest - self.lower_bound[child.item];
            if self.best.as_ref().is_some_and(|(b, _)| bound >= *b) {
                continue;
            }
            let pos = self.bin_pos(child.placement.bin_index);
            self.bins[pos].push(child.placement);
            self.placed[child.item] = Some(child.placement);
            let ok = self.dfs(objective + child.score, Some((child.placement.corner[2], child.item)));
            self.placed[child.item] = None;
            self.bins[pos].pop();
            if !ok {
                return false;
            }
        }
        true
    }

    fn leaf(&mut self, objective: f64) {
        if self.best.as_ref().is_some_and(|(b, _)| objective >= *b) {
            return;
        }
        let placements: Vec<Placement> = self.placed.iter().map(|p| p.expect("leaf has every box placed")).collect();
        // a box never counts as its own lateral neighbour, so the full bin can be used
        if self.require_cep && placements.iter().any(|p| cep_contacts(p, &self.bins[self.bin_pos(p.bin_index)]) < 2) {
            return;
        }
        self.best = Some((objective, placements));
    }
}

/// Minimizes the summed placement score of all `window` boxes jointly.
pub fn solve_joint_exact(
    committed: &[BinState],
    window: &[BoxDims],
    cfg: &RobotConfig,
    w: &Weights,
    opts: SearchOptions,
) -> JointResult {
    let min_index = committed.iter().map(|b| b.index).min().unwrap_or(1) as f64;
    let orientations: Vec<_> = window.iter().map(|d| distinct_orientations(d, cfg)).collect();
    let lower_bound = orientations
        .iter()
        .map(|os| {
            let min_h = os.iter().map(|(_, e)| e[2]).min().unwrap_or(0) as f64;
            w.w2 * min_h + w.w3 * min_index
        })
        .collect();
    let twin = (0..window.len())
        .map(|i| (0..i).rev().find(|j| window[*j].sides() == window[i].sides()))
        .collect();
    let mut search = Search {
        window,
        cfg: RobotConfig { require_cep: false, ..*cfg },
        weights: *w,
        mode: opts.mode,
        bins: committed.to_vec(),
        orientations,
        twin,
        lower_bound,
        placed: vec![None; window.len()],
        best: None,
        nodes: 0,
        budget: opts.node_budget,
        require_cep: cfg.require_cep,
    };
    let completed = search.dfs(0.0, None);
    let best = search.best.take().map(|(objective_value, ps)| JointSolution {
        placements: ps.into_iter().enumerate().collect(),
        objective_value,
    });
    match (completed, best) {
        (true, Some(s)) => JointResult::Solved(s),
        (true, None) => JointResult::Infeasible,
        (false, best) => JointResult::BudgetExhausted { best, nodes: search.nodes },
    }
}
