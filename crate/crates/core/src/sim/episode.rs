use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bin::BinState;
use crate::error::{Error, Result};
use crate::geometry::BoxDims;
use crate::heuristics::distinct_orientations;
use crate::opack::StepOutcome;
use crate::policy::Policy;

use super::lookahead::LookAhead;
use super::manager::BinManager;
use super::trace::{Trace, TraceConfig, TraceHeader, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub policy: Policy,
    pub lookahead: usize,
    pub open_bins: usize,
    pub bin: [u32; 3],
    /// Count bins still open when the stream ends towards the mean fill rate.
    pub count_open_at_end: bool,
    /// Record wall-clock policy time; disabled for byte-reproducible output.
    pub record_timing: bool,
}

impl EpisodeConfig {
    pub fn new(policy: Policy, lookahead: usize, bin: [u32; 3]) -> Self {
        Self { policy, lookahead, open_bins: 3, bin, count_open_at_end: false, record_timing: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=6).contains(&self.lookahead) {
            return Err(Error::Config(format!("look-ahead must be in 1..=6, got {}", self.lookahead)));
        }
        if self.open_bins == 0 {
            return Err(Error::Config("at least one bin must be open".into()));
        }
        if self.bin.contains(&0) {
            return Err(Error::Config("bin sides must be positive".into()));
        }
        self.policy.robot.validate()?;
        self.policy.weights.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub closed_fill_rates: Vec<f64>,
    /// Mean of `closed_fill_rates`; `None` when no bin was closed.
    pub mean_fill_rate: Option<f64>,
    /// Policy wall time per packed box, in seconds.
    pub time_per_box: Vec<f64>,
    pub boxes_packed: usize,
    pub bins_closed: usize,
    /// Bins that received at least one box.
    pub bins_used: usize,
    pub packed_grid_volume: u64,
    pub budget_exhausted_steps: usize,
    pub trace: Trace,
}

impl EpisodeMetrics {
    pub fn mean_time_per_box_ms(&self) -> f64 {
        if self.time_per_box.is_empty() {
            0.0
        } else {
            1000.0 * self.time_per_box.iter().sum::<f64>() / self.time_per_box.len() as f64
        }
    }
}

/// Streams a shuffled collection past the policy until every box is packed.
pub fn run_episode(collection: &[BoxDims], config: &EpisodeConfig, seed: u64) -> Result<EpisodeMetrics> {
    run_episode_observed(collection, config, seed, &mut |_, _, _| Ok(()))
}

/// Like [`run_episode`], calling `observe(step, open_bins, window)` before
/// each step's policy call.
pub fn run_episode_observed(
    collection: &[BoxDims],
    config: &EpisodeConfig,
    seed: u64,
    observe: &mut dyn FnMut(u64, &[BinState], &[BoxDims]) -> Result<()>,
) -> Result<EpisodeMetrics> {
    config.validate()?;
    if collection.is_empty() {
        return Err(Error::Config("collection is empty".into()));
    }
    let bin = BoxDims::new(0, config.bin[0], config.bin[1], config.bin[2])?;
    for item in collection {
        let fits = distinct_orientations(item, &config.policy.robot)
            .iter()
            .any(|(_, e)| e[0] <= bin.l && e[1] <= bin.b && e[2] <= bin.h);
        if !fits {
            return Err(Error::InvalidDims(format!(
                "box {} ({}x{}x{}) fits no allowed orientation of a {}x{}x{} bin",
                item.id, item.l, item.b, item.h, bin.l, bin.b, bin.h
            )));
        }
    }
    let mut order = collection.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let policy = &config.policy;
    let mut manager = BinManager::new(bin, config.open_bins)?;
    let mut conveyor = LookAhead::new(order.iter().copied(), config.lookahead);
    let mut records = Vec::with_capacity(order.len());
    let mut times = Vec::with_capacity(order.len());
    let mut budget_exhausted_steps = 0;

    while !conveyor.is_empty() {
        observe(records.len() as u64 + 1, manager.open(), conveyor.window())?;
        debug_assert_eq!(conveyor.window().len(), config.lookahead.min(conveyor.remaining()));
        let mut elapsed = 0.0;
        let (position, placement) = loop {
            let start = Instant::now();
            let decision = policy.decide(manager.open(), conveyor.window());
            elapsed += start.elapsed().as_secs_f64();
            if decision.budget_exhausted {
                budget_exhausted_steps += 1;
            }
            match decision.outcome {
                StepOutcome::Placed { position, placement } => break (position, placement),
                StepOutcome::Exhausted => {
                    if manager.open().iter().all(|b| b.is_empty()) {
                        return Err(Error::Protocol(format!(
                            "{} could not place any of {} boxes in empty bins",
                            policy.kind,
                            conveyor.window().len()
                        )));
                    }
                    manager.close_fullest_and_open();
                    debug_assert!(manager.open().iter().enumerate().all(|(k, b)| b.index == k + 1));
                }
            }
        };
        let picked = conveyor.pick(position);
        debug_assert_eq!(picked.id, placement.item.id);
        let bin_serial = manager.commit(placement);
        let time = if config.record_timing { elapsed } else { 0.0 };
        times.push(time);
        records.push(TraceRecord {
            step: records.len() as u64 + 1,
            box_id: placement.item.id,
            bin_serial,
            corner: placement.corner,
            orientation: placement.orientation,
            closed_bins_so_far: manager.closed().len(),
            policy_time_ms: time * 1000.0,
        });
    }

    let mut closed: Vec<f64> = manager.closed().iter().map(|c| c.fill_rate).collect();
    let bins_closed_in_stream = closed.len();
    let still_open = manager.drain_open();
    let bins_used = manager.closed().iter().filter(|c| !c.bin.is_empty()).count() + still_open.len();
    let packed_grid_volume = manager.closed().iter().map(|c| c.bin.packed_volume_grid()).sum::<u64>()
        + still_open.iter().map(|c| c.bin.packed_volume_grid()).sum::<u64>();
    if config.count_open_at_end {
        closed.extend(still_open.iter().map(|c| c.fill_rate));
    }
    let mean_fill_rate = (!closed.is_empty()).then(|| closed.iter().sum::<f64>() / closed.len() as f64);

    Ok(EpisodeMetrics {
        bins_closed: if config.count_open_at_end { closed.len() } else { bins_closed_in_stream },
        closed_fill_rates: closed,
        mean_fill_rate,
        time_per_box: times,
        boxes_packed: records.len(),
        bins_used,
        packed_grid_volume,
        budget_exhausted_steps,
        trace: Trace {
            header: TraceHeader {
                policy: policy.kind,
                seed,
                config: TraceConfig {
                    lookahead: config.lookahead,
                    open_bins: config.open_bins,
                    bin_dims: config.bin,
                    weights: policy.weights,
                    robot: policy.robot,
                    candidate_mode: policy.candidate_mode,
                    selection: policy.selection,
                    count_open_at_end: config.count_open_at_end,
                },
                boxes: order,
            },
            records,
        },
    })
}
