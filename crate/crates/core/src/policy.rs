//! The named packing policies compared by the benchmark.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bin::{BinState, RobotConfig};
use crate::error::Error;
use crate::geometry::BoxDims;
use crate::heuristics::{best_fit_with, first_fit_with, CandidateMode};
use crate::mpack::{mpack_decide, SearchOptions, DEFAULT_NODE_BUDGET};
use crate::opack::{opack_step, BestFitRule, FirstFitRule, MpackLiteRule, SelectionRule, StepOutcome, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "FF")]
    FirstFit,
    #[serde(rename = "BF")]
    BestFit,
    #[serde(rename = "O-FF")]
    OpackFirstFit,
    #[serde(rename = "O-BF")]
    OpackBestFit,
    #[serde(rename = "MPL")]
    MpackLite,
    #[serde(rename = "MP")]
    Mpack,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::FirstFit,
        PolicyKind::BestFit,
        PolicyKind::OpackFirstFit,
        PolicyKind::OpackBestFit,
        PolicyKind::MpackLite,
        PolicyKind::Mpack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::FirstFit => "FF",
            PolicyKind::BestFit => "BF",
            PolicyKind::OpackFirstFit => "O-FF",
            PolicyKind::OpackBestFit => "O-BF",
            PolicyKind::MpackLite => "MPL",
            PolicyKind::Mpack => "MP",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownPolicy(t.to_string()))
    }
}

/// A policy together with every knob it reads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub kind: PolicyKind,
    pub weights: Weights,
    pub robot: RobotConfig,
    pub candidate_mode: CandidateMode,
    pub selection: SelectionRule,
    pub node_budget: u64,
}

impl Policy {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            weights: Weights::default(),
            robot: RobotConfig::default(),
            candidate_mode: CandidateMode::Extreme,
            selection: SelectionRule::MinScore,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// A policy's answer for the current conveyor window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub outcome: StepOutcome,
    pub budget_exhausted: bool,
}

impl Policy {
    /// Chooses a box and its placement; never mutates `bins`.
    pub fn decide(&self, bins: &[BinState], window: &[BoxDims]) -> Decision {
        let mode = self.candidate_mode;
        let plain = |found: Option<crate::heuristics::PlacementDecision>| match found {
            Some(d) => StepOutcome::Placed { position: 0, placement: d.placement },
            None => StepOutcome::Exhausted,
        };
        let outcome = match self.kind {
            // plain heuristics only see the nearest box
            PolicyKind::FirstFit => plain(window.first().and_then(|b| first_fit_with(b, bins, &self.robot, mode))),
            PolicyKind::BestFit => plain(window.first().and_then(|b| best_fit_with(b, bins, &self.robot, mode))),
            PolicyKind::OpackFirstFit => {
                opack_step(&FirstFitRule { mode }, bins, window, &self.robot, &self.weights, self.selection)
            }
            PolicyKind::OpackBestFit => {
                opack_step(&BestFitRule { mode }, bins, window, &self.robot, &self.weights, self.selection)
            }
            PolicyKind::MpackLite => opack_step(
                &MpackLiteRule { weights: self.weights, mode },
                bins,
                window,
                &self.robot,
                &self.weights,
                self.selection,
            ),
            PolicyKind::Mpack => {
                let opts = SearchOptions { mode, node_budget: self.node_budget };
                let (outcome, stats) = mpack_decide(bins, window, &self.robot, &self.weights, opts, self.selection);
                return Decision { outcome, budget_exhausted: stats.budget_exhausted > 0 };
            }
        };
        Decision { outcome, budget_exhausted: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in PolicyKind::ALL {
            assert_eq!(p.name().parse::<PolicyKind>().unwrap(), p);
        }
        assert_eq!("o-ff".parse::<PolicyKind>().unwrap(), PolicyKind::OpackFirstFit);
        let err = "JP".parse::<PolicyKind>().unwrap_err().to_string();
        assert!(err.contains("O-FF") && err.contains("MPL"));
    }

    #[test]
    fn serde_uses_short_names() {
        assert_eq!(serde_json::to_string(&PolicyKind::OpackBestFit).unwrap(), "\"O-BF\"");
    }
}
