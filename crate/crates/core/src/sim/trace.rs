use serde::{Deserialize, Serialize};

use crate::bin::RobotConfig;
use crate::geometry::{BoxDims, BoxId, Orientation, Point};
use crate::heuristics::CandidateMode;
use crate::opack::{SelectionRule, Weights};
use crate::policy::PolicyKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub lookahead: usize,
    pub open_bins: usize,
    pub bin_dims: [u32; 3],
    pub weights: Weights,
    pub robot: RobotConfig,
    pub candidate_mode: CandidateMode,
    pub selection: SelectionRule,
    pub count_open_at_end: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub policy: PolicyKind,
    pub seed: u64,
    pub config: TraceConfig,
    /// The collection in conveyor order after shuffling.
    pub boxes: Vec<BoxDims>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub box_id: BoxId,
    pub bin_serial: u64,
    pub corner: Point,
    pub orientation: Orientation,
    pub closed_bins_so_far: usize,
    pub policy_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse(format!("trace: {e}")))
    }
}
