use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use binpack3d_core::heuristics::CandidateMode;
use binpack3d_core::sim::BinType;
use binpack3d_core::{Orientation, PolicyKind, Weights};

#[derive(Parser)]
#[command(name = "binpack3d", version, about = "Online 3D bin packing with look-ahead")]
pub struct Cli {
    /// Use a running service instead of an in-process one.
    #[arg(long, global = true, value_name = "URL")]
    pub server: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate box collections as CSV files.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the policy x look-ahead x seed grid and write metrics.
    Bench(BenchArgs),
    /// Replay trace files against the occupancy-grid checker.
    Validate {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
    /// Run an MP episode and write one LP model per step.
    ExportMilp(ExportArgs),
    /// Run the HTTP service in the foreground.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
    },
}

#[derive(Subcommand)]
pub enum GenCommand {
    /// Guillotine-cut bins into boxes; each collection fills `--bins` bins exactly.
    Synthetic {
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, value_parser = parse_dims, default_value = "80x45x45")]
        dims: [u32; 3],
        /// Number of collections.
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = binpack3d_core::sim::SYNTHETIC_MIN_SIDE)]
        min_side: u32,
        #[arg(long, default_value_t = binpack3d_core::sim::SYNTHETIC_MAX_SIDE)]
        max_side: u32,
        /// Collection k uses seed `seed + k`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "collections")]
        out: PathBuf,
    },
    /// Sample fractional boxes until their volume fills `--target-bins` bins.
    Industrial {
        #[arg(long = "type", value_parser = parse_bin_type)]
        bin_type: BinType,
        #[arg(long, default_value_t = 4)]
        target_bins: usize,
        #[arg(long, default_value_t = 25)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "collections")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    MinScore,
    FillAdaptive,
}

/// Knobs every policy reads.
#[derive(Args, Clone)]
pub struct PolicyArgs {
    #[arg(long, value_parser = parse_weights, default_value = "1,1,100")]
    pub weights: Weights,
    /// Candidate corners; defaults to extreme points.
    #[arg(long, value_parser = parse_mode, default_value = "extreme")]
    pub candidate_mode: CandidateMode,
    /// Require two lateral contacts for every placed box.
    #[arg(long, value_enum, default_value = "off")]
    pub cep: Switch,
    /// Comma-separated allowed orientations (lbh,lhb,blh,bhl,hlb,hbl).
    #[arg(long, value_parser = parse_orientations, default_value = "lbh,lhb,blh,bhl,hlb,hbl")]
    pub orientations: List<Orientation>,
    /// Forbid the strictly largest side from standing vertical.
    #[arg(long)]
    pub forbid_largest_vertical: bool,
    #[arg(long, default_value_t = 3)]
    pub min_support: u8,
    #[arg(long, value_enum, default_value = "min-score")]
    pub selection: Selection,
    /// Node cap for the MP joint search.
    #[arg(long, default_value_t = binpack3d_core::mpack::DEFAULT_NODE_BUDGET)]
    pub node_budget: u64,
}

/// Bin and manager settings shared by episode-running commands.
#[derive(Args, Clone)]
pub struct BinArgs {
    #[arg(long, default_value_t = 3)]
    pub open_bins: usize,
    /// Bin type label; also picks the bin size unless `--bin-dims` is given.
    #[arg(long, value_parser = parse_bin_type, default_value = "SYN")]
    pub bin_type: BinType,
    #[arg(long, value_parser = parse_dims)]
    pub bin_dims: Option<[u32; 3]>,
    /// Include bins still open at the end of a stream in the mean fill rate.
    #[arg(long)]
    pub count_open_at_end: bool,
    /// Write zero policy times so outputs are byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Directory of collection CSV files (read in file-name order).
    #[arg(long)]
    pub collections: PathBuf,
    #[arg(long, value_parser = parse_policies, default_value = "FF,BF,O-FF,O-BF,MPL")]
    pub policies: List<PolicyKind>,
    /// Look-aheads: `3`, `1,3,5` or `1..5`.
    #[arg(long = "l", value_parser = parse_lookaheads, default_value = "1..5")]
    pub lookaheads: List<usize>,
    /// Seed count `n` (seeds 0..n) or an explicit list / range.
    #[arg(long, value_parser = parse_seeds, default_value = "25")]
    pub seeds: List<u64>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub bin: BinArgs,
    #[arg(long, default_value = "bench_out")]
    pub out: PathBuf,
    /// Also write per-step LP models for every MP episode under this directory.
    #[arg(long, value_name = "DIR")]
    pub export_milp: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub collection: PathBuf,
    #[arg(long = "l", default_value_t = 3)]
    pub lookahead: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub bin: BinArgs,
    #[arg(long, value_name = "DIR", default_value = "milp")]
    pub export_milp: PathBuf,
}

/// A comma-separated flag value; a plain `Vec` would make clap expect repeated flags.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

pub fn parse_dims(s: &str) -> Result<[u32; 3], String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    let [l, b, h] = parts.as_slice() else {
        return Err(format!("expected LxBxH, got `{s}`"));
    };
    let side = |t: &str| t.trim().parse::<u32>().ok().filter(|&v| v > 0).ok_or(format!("bad side `{t}` in `{s}`"));
    Ok([side(l)?, side(b)?, side(h)?])
}

fn parse_bin_type(s: &str) -> Result<BinType, String> {
    s.parse().map_err(|e: binpack3d_core::Error| e.to_string())
}

fn parse_weights(s: &str) -> Result<Weights, String> {
    s.parse().map_err(|e: binpack3d_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<CandidateMode, String> {
    s.parse().map_err(|e: binpack3d_core::Error| e.to_string())
}

fn parse_orientations(s: &str) -> Result<List<Orientation>, String> {
    s.split(',').map(|t| t.trim().parse().map_err(|e: binpack3d_core::Error| e.to_string())).collect::<Result<_, _>>().map(List)
}

fn parse_policies(s: &str) -> Result<List<PolicyKind>, String> {
    s.split(',').map(|t| t.trim().parse().map_err(|e: binpack3d_core::Error| e.to_string())).collect::<Result<_, _>>().map(List)
}

/// `a..b` (inclusive), `a,b,c` or a single value.
fn parse_list(s: &str) -> Result<Vec<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("`{t}` is not a non-negative integer"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range `{s}`"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

fn parse_lookaheads(s: &str) -> Result<List<usize>, String> {
    let ls = parse_list(s)?;
    if let Some(bad) = ls.iter().find(|l| !(1..=6).contains(*l)) {
        return Err(format!("look-ahead {bad} outside 1..6"));
    }
    Ok(List(ls.into_iter().map(|l| l as usize).collect()))
}

fn parse_seeds(s: &str) -> Result<List<u64>, String> {
    if s.contains("..") || s.contains(',') {
        return parse_list(s).map(List);
    }
    let n: u64 = s.trim().parse().map_err(|_| format!("`{s}` is not a seed count or list"))?;
    if n == 0 {
        return Err("seed count must be positive".into());
    }
    Ok(List((0..n).collect()))
}
