//! Look-ahead adaptation by virtual packing.
//!
//! A step sorts the visible conveyor boxes, places each one in a scratch copy
//! of the open bins using some single-box packing rule (so later boxes see
//! the earlier virtual ones), and finally commits exactly one box: one whose
//! virtual location is stable using only the real bin contents.
//!
//! Plugging in First-Fit, Best-Fit or the weighted-score rule yields the
//! O-FF, O-BF and MPackLite policies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bin::{BinState, RobotConfig};
use crate::feasibility::is_feasible;
use crate::geometry::{BoxDims, BoxId, Placement};
use crate::heuristics::{candidate_points, distinct_orientations, first_fit_with, best_fit_with, pose_ok, CandidateMode};

/// Objective weights: `w1` spreads on the floor (column building), `w2`
/// keeps the packing low (floor building), `w3` prefers earlier bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { w1: 1.0, w2: 1.0, w3: 100.0 }
    }
}

impl Weights {
    pub fn validate(&self) -> crate::Result<()> {
        if [self.w1, self.w2, self.w3].iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(crate::Error::Config(format!("weights must be finite and non-negative, got {self:?}")));
        }
        Ok(())
    }
}

impl std::str::FromStr for Weights {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| crate::Error::Parse(format!("weights `{s}`: {e}")))?;
        let [w1, w2, w3] = parts[..] else {
            return Err(crate::Error::Parse(format!("weights `{s}`: expected w1,w2,w3")));
        };
        let w = Weights { w1, w2, w3 };
        w.validate()?;
        Ok(w)
    }
}

/// `w1·(x + y) + w2·z̄ + w3·j` for a placement in open bin `j`.
pub fn score(p: &Placement, w: &Weights) -> f64 {
    selection_score(p, w) + w.w3 * p.bin_index as f64
}

/// The objective without the bin-index term, used when choosing which box to pick.
pub fn selection_score(p: &Placement, w: &Weights) -> f64 {
    w.w1 * (p.corner[0] + p.corner[1]) as f64 + w.w2 * p.far_corner[2] as f64
}

/// Conveyor positions of `window` ordered by decreasing grid volume, then
/// decreasing height, then conveyor position.
pub fn sort_order(window: &[BoxDims]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..window.len()).collect();
    order.sort_by(|a, b| {
        let (x, y) = (&window[*a], &window[*b]);
        y.grid_volume().cmp(&x.grid_volume()).then(y.h.cmp(&x.h))
    });
    order
}

pub fn sort_lookahead(window: &[BoxDims]) -> Vec<BoxDims> {
    sort_order(window).into_iter().map(|i| window[i]).collect()
}

/// Open bins with look-ahead boxes tentatively packed into them.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualState {
    pub bins: Vec<BinState>,
    pub virtual_placements: BTreeMap<BoxId, Placement>,
}

impl VirtualState {
    pub fn new(real: &[BinState]) -> Self {
        Self { bins: real.to_vec(), virtual_placements: BTreeMap::new() }
    }

    pub fn place(&mut self, p: Placement) {
        let bin = self
            .bins
            .iter_mut()
            .find(|b| b.index == p.bin_index)
            .expect("virtual placement targets an open bin");
        bin.push(p);
        self.virtual_placements.insert(p.id(), p);
    }
}

/// A single-box packing rule evaluated against (possibly virtual) open bins.
pub trait PackRule {
    fn name(&self) -> &'static str;
    fn place(&self, bins: &[BinState], item: &BoxDims, cfg: &RobotConfig) -> Option<Placement>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FirstFitRule {
    pub mode: CandidateMode,
}

impl PackRule for FirstFitRule {
    fn name(&self) -> &'static str {
        "FF"
    }

    fn place(&self, bins: &[BinState], item: &BoxDims, cfg: &RobotConfig) -> Option<Placement> {
        first_fit_with(item, bins, cfg, self.mode).map(|d| d.placement)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BestFitRule {
    pub mode: CandidateMode,
}

impl PackRule for BestFitRule {
    fn name(&self) -> &'static str {
        "BF"
    }

    fn place(&self, bins: &[BinState], item: &BoxDims, cfg: &RobotConfig) -> Option<Placement> {
        best_fit_with(item, bins, cfg, self.mode).map(|d| d.placement)
    }
}

/// Weighted-score minimization over every open bin, candidate and orientation.
#[derive(Clone, Copy, Debug, Default)]
pub struct MpackLiteRule {
    pub weights: Weights,
    pub mode: CandidateMode,
}

impl PackRule for MpackLiteRule {
    fn name(&self) -> &'static str {
        "MPL"
    }

    fn place(&self, bins: &[BinState], item: &BoxDims, cfg: &RobotConfig) -> Option<Placement> {
        packrule_mpl_with(bins, item, cfg, &self.weights, self.mode)
    }
}

/// Placement minimizing [`score`] with extreme-point candidates.
pub fn packrule_mpl(vstate: &VirtualState, item: &BoxDims, cfg: &RobotConfig, w: &Weights) -> Option<Placement> {
    packrule_mpl_with(&vstate.bins, item, cfg, w, CandidateMode::Extreme)
}

/// Placement minimizing [`score`]; ties go to the smallest
/// `(bin_index, z, y, x, orientation)`.
pub fn packrule_mpl_with(
    bins: &[BinState],
    item: &BoxDims,
    cfg: &RobotConfig,
    w: &Weights,
    mode: CandidateMode,
) -> Option<Placement> {
    let orientations = distinct_orientations(item, cfg);
    let mut best: Option<(f64, Placement)> = None;
    let mut order: Vec<&BinState> = bins.iter().collect();
    order.sort_by_key(|b| b.index);
    for bin in order {
        for c in candidate_points(bin, mode) {
            for (o, ext) in &orientations {
                let p = Placement::new(*item, bin.index, c.point, *o);
                let s = score(&p, w);
                if let Some((bs, bp)) = &best {
                    if s.total_cmp(bs).then_with(|| tie_key(&p).cmp(&tie_key(bp))).is_ge() {
                        continue;
                    }
                }
                if pose_ok(bin, c.point, *ext, cfg) {
                    best = Some((s, p));
                }
            }
        }
    }
    best.map(|(_, p)| p)
}

fn tie_key(p: &Placement) -> (usize, u32, u32, u32, usize) {
    (p.bin_index, p.corner[2], p.corner[1], p.corner[0], p.orientation.index())
}

/// A virtually placed look-ahead box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    /// Position on the conveyor, 0 = nearest to the arm.
    pub position: usize,
    pub placement: Placement,
}

/// How BOXPACK chooses among stand-alone stable candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Smallest `w1·(x + y) + w2·z̄`.
    #[default]
    MinScore,
    /// Largest box while the target bin's fill rate is below `threshold`
    /// percent, smallest box otherwise.
    FillAdaptive { threshold: f64 },
}

/// Picks the box to commit among virtually placed candidates.
///
/// Only candidates that are feasible against `real_bins` alone survive, so a
/// box that needs another look-ahead box underneath is never picked.
pub fn boxpack_select(
    real_bins: &[BinState],
    candidates: &[Candidate],
    cfg: &RobotConfig,
    w: &Weights,
    rule: SelectionRule,
) -> Option<Candidate> {
    let stable: Vec<(&Candidate, &BinState)> = candidates
        .iter()
        .filter_map(|c| {
            let bin = real_bins.iter().find(|b| b.index == c.placement.bin_index)?;
            is_feasible(bin, &c.placement, cfg).is_ok().then_some((c, bin))
        })
        .collect();
    let by_score = |a: &(&Candidate, &BinState), b: &(&Candidate, &BinState)| {
        selection_score(&a.0.placement, w)
            .total_cmp(&selection_score(&b.0.placement, w))
            .then(a.0.position.cmp(&b.0.position))
    };
    match rule {
        SelectionRule::MinScore => stable.into_iter().min_by(by_score).map(|(c, _)| *c),
        SelectionRule::FillAdaptive { threshold } => stable
            .into_iter()
            .min_by(|a, b| {
                let vol = |x: &(&Candidate, &BinState)| x.0.placement.item.grid_volume();
                let size = if a.1.fill_rate() < threshold { vol(b).cmp(&vol(a)) } else { vol(a).cmp(&vol(b)) };
                size.then_with(|| by_score(a, b))
            })
            .map(|(c, _)| *c),
    }
}

/// Outcome of one online packing step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    /// Commit the box at `position` on the conveyor to `placement`.
    Placed { position: usize, placement: Placement },
    /// No visible box has a location in the open bins.
    Exhausted,
}

/// One look-ahead step: sort, virtually pack every box with `rule`, then select.
///
/// Boxes the rule cannot place are skipped and stay on the conveyor.
pub fn opack_step(
    rule: &dyn PackRule,
    bins: &[BinState],
    window: &[BoxDims],
    cfg: &RobotConfig,
    w: &Weights,
    selection: SelectionRule,
) -> StepOutcome {
    let mut vstate = VirtualState::new(bins);
    let mut candidates = Vec::with_capacity(window.len());
    for position in sort_order(window) {
        if let Some(placement) = rule.place(&vstate.bins, &window[position], cfg) {
            vstate.place(placement);
            candidates.push(Candidate { position, placement });
        }
    }
    match boxpack_select(bins, &candidates, cfg, w, selection) {
        Some(c) => StepOutcome::Placed { position: c.position, placement: c.placement },
        None => StepOutcome::Exhausted,
    }
}
