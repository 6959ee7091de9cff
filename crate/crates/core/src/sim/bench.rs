//! The policy x look-ahead x seed benchmark grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxDims;
use crate::policy::{Policy, PolicyKind};

use super::episode::{run_episode, EpisodeConfig, EpisodeMetrics};
use super::trace::Trace;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "BINPACK_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub policies: Vec<PolicyKind>,
    /// Weights, robot rules and search knobs shared by every policy.
    pub template: Policy,
    pub lookaheads: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Label written to the `bin_type` column.
    pub bin_type: String,
    pub bin: [u32; 3],
    pub open_bins: usize,
    pub count_open_at_end: bool,
    pub record_timing: bool,
    pub keep_traces: bool,
    pub threads: Option<usize>,
}

impl BenchSpec {
    pub fn new(policies: Vec<PolicyKind>, lookaheads: Vec<usize>, seeds: Vec<u64>, bin_type: &str, bin: [u32; 3]) -> Self {
        Self {
            policies,
            template: Policy::new(PolicyKind::FirstFit),
            lookaheads,
            seeds,
            bin_type: bin_type.to_string(),
            bin,
            open_bins: 3,
            count_open_at_end: false,
            record_timing: true,
            keep_traces: false,
            threads: None,
        }
    }

    pub fn episodes(&self) -> usize {
        self.policies.len() * self.lookaheads.len() * self.seeds.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub policy: PolicyKind,
    pub bin_type: String,
    pub lookahead: usize,
    pub seed: u64,
    pub mean_fill_rate: Option<f64>,
    pub time_per_box_ms: f64,
    pub bins_closed: usize,
    pub budget_exhausted_steps: usize,
}

pub const METRICS_HEADER: &str = "policy,bin_type,lookahead,seed,mean_fill_rate,time_per_box_ms,bins_closed";

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        let fr = self.mean_fill_rate.map(|v| format!("{v:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.6},{}",
            self.policy, self.bin_type, self.lookahead, self.seed, fr, self.time_per_box_ms, self.bins_closed
        )
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchEpisode {
    pub row: MetricsRow,
    pub trace: Option<Trace>,
}

/// Worker count: explicit request, else `BINPACK_THREADS`, else all cores.
pub fn worker_threads(requested: Option<usize>) -> usize {
    let env = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    match (requested.filter(|&n| n > 0), env) {
        (Some(r), Some(cap)) => r.min(cap),
        (Some(r), None) => r,
        (None, Some(cap)) => cap.min(cores).max(1),
        (None, None) => cores,
    }
}

/// Runs every (policy, look-ahead, seed) episode. Seed `k` in the list uses
/// `collections[k % collections.len()]`. Rows come back in grid order
/// regardless of scheduling.
pub fn run_bench(spec: &BenchSpec, collections: &[Vec<BoxDims>]) -> Result<Vec<BenchEpisode>> {
    if collections.is_empty() {
        return Err(Error::Config("benchmark needs at least one collection".into()));
    }
    if spec.episodes() == 0 {
        return Err(Error::Config("benchmark grid is empty".into()));
    }
    let jobs: Vec<(PolicyKind, usize, usize)> = spec
        .policies
        .iter()
        .flat_map(|&p| spec.lookaheads.iter().flat_map(move |&l| (0..spec.seeds.len()).map(move |k| (p, l, k))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads(spec.threads))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(kind, lookahead, k)| {
                let seed = spec.seeds[k];
                let cfg = EpisodeConfig {
                    policy: Policy { kind, ..spec.template },
                    lookahead,
                    open_bins: spec.open_bins,
                    bin: spec.bin,
                    count_open_at_end: spec.count_open_at_end,
                    record_timing: spec.record_timing,
                };
                let m = run_episode(&collections[k % collections.len()], &cfg, seed)?;
                Ok(to_episode(spec, kind, lookahead, seed, m))
            })
            .collect()
    })
}

fn to_episode(spec: &BenchSpec, policy: PolicyKind, lookahead: usize, seed: u64, m: EpisodeMetrics) -> BenchEpisode {
    let row = MetricsRow {
        policy,
        bin_type: spec.bin_type.clone(),
        lookahead,
        seed,
        mean_fill_rate: m.mean_fill_rate,
        time_per_box_ms: m.mean_time_per_box_ms(),
        bins_closed: m.bins_closed,
        budget_exhausted_steps: m.budget_exhausted_steps,
    };
    BenchEpisode { row, trace: spec.keep_traces.then_some(m.trace) }
}

/// One aggregated (policy, look-ahead) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub policy: PolicyKind,
    pub lookahead: usize,
    pub episodes: usize,
    /// Mean over episodes that closed at least one bin.
    pub mean_fill_rate: Option<f64>,
    pub mean_time_per_box_ms: f64,
    pub budget_exhausted_episodes: usize,
}

pub fn summarize(rows: &[MetricsRow]) -> Vec<SummaryCell> {
    let mut groups: BTreeMap<(PolicyKind, usize), Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.policy, r.lookahead)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((policy, lookahead), rs)| {
            let frs: Vec<f64> = rs.iter().filter_map(|r| r.mean_fill_rate).collect();
            SummaryCell {
                policy,
                lookahead,
                episodes: rs.len(),
                mean_fill_rate: (!frs.is_empty()).then(|| frs.iter().sum::<f64>() / frs.len() as f64),
                mean_time_per_box_ms: rs.iter().map(|r| r.time_per_box_ms).sum::<f64>() / rs.len() as f64,
                budget_exhausted_episodes: rs.iter().filter(|r| r.budget_exhausted_steps > 0).count(),
            }
        })
        .collect()
}

/// Plain-text table: one row per policy, one column per look-ahead, each
/// cell `FR% / ms per box`.
pub fn summary_table(cells: &[SummaryCell]) -> String {
    let mut ls: Vec<usize> = cells.iter().map(|c| c.lookahead).collect();
    ls.sort_unstable();
    ls.dedup();
    let mut policies: Vec<PolicyKind> = cells.iter().map(|c| c.policy).collect();
    policies.sort();
    policies.dedup();
    let mut out = format!("{:<6}", "policy");
    for l in &ls {
        let _ = write!(out, " | {:>20}", format!("l={l} FR% / ms"));
    }
    out.push('\n');
    for p in &policies {
        let _ = write!(out, "{:<6}", p.name());
        for l in &ls {
            let cell = cells.iter().find(|c| c.policy == *p && c.lookahead == *l);
            let text = match cell {
                Some(c) => {
                    let fr = c.mean_fill_rate.map_or("-".to_string(), |v| format!("{v:.2}"));
                    let mark = if c.budget_exhausted_episodes > 0 { "*" } else { "" };
                    format!("{fr} / {:.3}{mark}", c.mean_time_per_box_ms)
                }
                None => "-".into(),
            };
            let _ = write!(out, " | {text:>20}");
        }
        out.push('\n');
    }
    let exhausted: usize = cells.iter().map(|c| c.budget_exhausted_episodes).sum();
    if exhausted > 0 {
        let _ = writeln!(out, "* {exhausted} episode(s) hit the search node budget");
    }
    out
}
