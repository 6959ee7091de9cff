//! Conveyor and bin-manager simulation, data generation and benchmarking.

mod bench;
mod collection;
mod episode;
mod export;
mod generate;
mod lookahead;
mod manager;
mod trace;
mod validate;

pub use bench::{
    metrics_csv, run_bench, summarize, summary_table, worker_threads, BenchEpisode, BenchSpec, MetricsRow, SummaryCell,
    METRICS_HEADER, THREADS_ENV,
};
pub use collection::{collection_to_csv, load_collection, read_collection, save_collection};
pub use export::{episode_models, model_file_name, write_model_files, ModelFile};
pub use episode::{run_episode, run_episode_observed, EpisodeConfig, EpisodeMetrics};
pub use generate::{
    gen_industrial_like, gen_industrial_with, gen_synthetic, BinType, IndustrialDistribution, SyntheticCollection,
    SYNTHETIC_MAX_SIDE, SYNTHETIC_MIN_SIDE,
};
pub use lookahead::LookAhead;
pub use manager::{BinManager, ClosedBin};
pub use trace::{Trace, TraceConfig, TraceHeader, TraceRecord};
pub use validate::{validate_trace, TraceIssue, TraceViolation, ValidationReport};

use crate::bin::BinState;

/// Packed true volume over bin volume, in percent.
pub fn fill_rate(bin: &BinState) -> f64 {
    bin.fill_rate()
}
