//! Request and response bodies shared by the HTTP service and its client.

use serde::{Deserialize, Serialize};

use crate::geometry::{BoxDims, Placement};
use crate::policy::Policy;
use crate::sim::{BenchEpisode, BenchSpec, BinType, EpisodeConfig, ModelFile, SummaryCell};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRequest {
    pub bin: [u32; 3],
    pub n_bins: usize,
    pub min_side: u32,
    pub max_side: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndustrialRequest {
    pub bin_type: BinType,
    pub target_bins: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectionResponse {
    pub boxes: Vec<BoxDims>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRequest {
    pub collection: Vec<BoxDims>,
    pub config: EpisodeConfig,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRequest {
    pub spec: BenchSpec,
    pub collections: Vec<Vec<BoxDims>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResponse {
    pub episodes: Vec<BenchEpisode>,
    pub summary: Vec<SummaryCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpExportResponse {
    pub files: Vec<ModelFile>,
    pub boxes_packed: usize,
}

/// Opens an online packing session: the caller feeds boxes as they arrive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRequest {
    pub policy: Policy,
    pub bin: [u32; 3],
    pub open_bins: usize,
    pub lookahead: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: String,
}

/// Boxes newly visible on the conveyor; they join the back of the window.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepRequest {
    #[serde(default)]
    pub arrivals: Vec<BoxDims>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    /// `None` when the window is empty.
    pub placed: Option<SessionPlacement>,
    pub window: Vec<BoxDims>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionPlacement {
    pub position: usize,
    pub placement: Placement,
    pub bin_serial: u64,
    /// Serials of bins closed to make room for this box.
    pub closed_serials: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub window: Vec<BoxDims>,
    pub open: Vec<BinSummary>,
    pub closed: Vec<BinSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub serial: u64,
    pub index: usize,
    pub boxes: usize,
    pub fill_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}
