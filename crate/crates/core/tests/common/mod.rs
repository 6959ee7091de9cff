//! Random states and brute-force reference solvers shared by the oracle tests.
//!
//! Nothing in here calls the candidate generators or searches under test; the
//! only library pieces used are the geometry types and `is_feasible`.

#![allow(dead_code)]

use binpack3d_core::{is_feasible, orientation_allowed, BinState, BoxDims, Orientation, Placement, RobotConfig, Weights};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dims(id: u32, l: u32, b: u32, h: u32) -> BoxDims {
    BoxDims::new(id, l, b, h).unwrap()
}

pub fn random_box(rng: &mut ChaCha8Rng, id: u32, lo: u32, hi: u32) -> BoxDims {
    dims(id, rng.gen_range(lo..=hi), rng.gen_range(lo..=hi), rng.gen_range(lo..=hi))
}

pub fn random_config(rng: &mut ChaCha8Rng) -> RobotConfig {
    RobotConfig {
        forbid_largest_dim_vertical: rng.gen_bool(0.3),
        min_supported_vertices: if rng.gen_bool(0.8) { 3 } else { 4 },
        require_cep: rng.gen_bool(0.5),
        ..RobotConfig::default()
    }
}

/// `n_bins` open bins of one shared size with a random stable packing in each.
/// Ids of the packed boxes start at `first_id`; the next free id is returned.
pub fn random_bins(
    rng: &mut ChaCha8Rng,
    n_bins: usize,
    bin: [u32; 3],
    max_boxes: usize,
    side_hi: u32,
    first_id: u32,
) -> (Vec<BinState>, u32) {
    let bin_dims = dims(0, bin[0], bin[1], bin[2]);
    let plain = RobotConfig::default();
    let mut id = first_id;
    let mut bins = Vec::with_capacity(n_bins);
    for j in 1..=n_bins {
        let mut state = BinState::new(bin_dims, j, j as u64);
        let target = rng.gen_range(0..=max_boxes);
        let mut attempts = 0;
        while state.placements().len() < target && attempts < 400 {
            attempts += 1;
            let item = random_box(rng, id, 1, side_hi);
            let o = Orientation::ALL[rng.gen_range(0..6)];
            let mut zs = vec![0];
            zs.extend(state.placements().iter().map(|p| p.far_corner[2]));
            let z = zs[rng.gen_range(0..zs.len())];
            let x = rng.gen_range(0..bin[0]);
            let y = rng.gen_range(0..bin[1]);
            let p = Placement::new(item, j, [x, y, z], o);
            if is_feasible(&state, &p, &plain).is_ok() {
                state.push(p);
                id += 1;
            }
        }
        bins.push(state);
    }
    (bins, id)
}

/// `w1·(x + y) + w2·z̄ + w3·j`, evaluated from scratch.
pub fn objective(p: &Placement, w: &Weights) -> f64 {
    let e = p.extents();
    w.w1 * f64::from(p.corner[0] + p.corner[1]) + w.w2 * f64::from(p.corner[2] + e[2]) + w.w3 * p.bin_index as f64
}

fn disjoint(a: &Placement, b: &Placement) -> bool {
    (0..3).any(|k| a.far_corner[k] <= b.corner[k] || b.far_corner[k] <= a.corner[k])
}

/// Every corner on the 1 cm grid and every allowed orientation that keeps
/// `item` inside bin `bin` and clear of its packed boxes.
fn geometric_poses(bin: &BinState, item: &BoxDims, cfg: &RobotConfig, heights: &[u32]) -> Vec<Placement> {
    let [bl, bb, bh] = bin.extents();
    let mut out = Vec::new();
    for o in Orientation::ALL {
        if !orientation_allowed(item, o, cfg) {
            continue;
        }
        let probe = Placement::new(*item, bin.index, [0, 0, 0], o);
        let [l, b, h] = probe.extents();
        if l > bl || b > bb || h > bh {
            continue;
        }
        for &z in heights.iter().filter(|z| **z + h <= bh) {
            for y in 0..=bb - b {
                for x in 0..=bl - l {
                    let p = Placement::new(*item, bin.index, [x, y, z], o);
                    if bin.placements().iter().all(|q| disjoint(&p, q)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Minimum score of a single box over every grid corner, bin and orientation,
/// checked with `is_feasible` (CEP included when `cfg` asks for it).
pub fn exhaustive_single(bins: &[BinState], item: &BoxDims, cfg: &RobotConfig, w: &Weights) -> Option<f64> {
    let mut best: Option<f64> = None;
    for bin in bins {
        let all: Vec<u32> = (0..bin.extents()[2]).collect();
        for p in geometric_poses(bin, item, cfg, &all) {
            if is_feasible(bin, &p, cfg).is_ok() {
                let s = objective(&p, w);
                if best.is_none_or(|b| s < b) {
                    best = Some(s);
                }
            }
        }
    }
    best
}

/// Base heights any window box could possibly sit at: the floor, the top of a
/// packed box, or those raised by stacking up to `window.len() - 1` window boxes.
fn reachable_heights(bin: &BinState, window: &[BoxDims]) -> Vec<u32> {
    let mut zs: Vec<u32> = std::iter::once(0).chain(bin.placements().iter().map(|p| p.far_corner[2])).collect();
    let sides: Vec<u32> = window.iter().flat_map(|d| d.sides()).collect();
    for _ in 1..window.len() {
        let grown: Vec<u32> = zs.iter().flat_map(|z| sides.iter().map(move |s| z + s)).collect();
        zs.extend(grown);
    }
    zs.retain(|z| *z < bin.extents()[2]);
    zs.sort_unstable();
    zs.dedup();
    zs
}

/// Minimum summed score over every joint placement of `window` that is stable
/// once complete (each box checked by `is_feasible` against the packed boxes
/// plus the other window boxes) and, if required, satisfies CEP in the final
/// arrangement.
pub fn brute_force_joint(bins: &[BinState], window: &[BoxDims], cfg: &RobotConfig, w: &Weights) -> Option<f64> {
    let geometric = RobotConfig { require_cep: false, ..*cfg };
    let mut poses: Vec<Vec<(f64, Placement)>> = window
        .iter()
        .map(|item| {
            let mut v: Vec<(f64, Placement)> = bins
                .iter()
                .flat_map(|bin| geometric_poses(bin, item, cfg, &reachable_heights(bin, window)))
                .map(|p| (objective(&p, w), p))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
        .collect();
    let mut tail = vec![0.0; window.len() + 1];
    for i in (0..window.len()).rev() {
        match poses[i].first() {
            Some((s, _)) => tail[i] = tail[i + 1] + s,
            None => return None,
        }
    }
    let mut ctx = Joint { bins, cfg: *cfg, geometric, tail, best: None };
    let poses = std::mem::take(&mut poses);
    ctx.dfs(&poses, &mut Vec::new(), 0.0);
    ctx.best
}

struct Joint<'a> {
    bins: &'a [BinState],
    cfg: RobotConfig,
    geometric: RobotConfig,
    tail: Vec<f64>,
    best: Option<f64>,
}

impl Joint<'_> {
    fn dfs(&mut self, poses: &[Vec<(f64, Placement)>], chosen: &mut Vec<Placement>, partial: f64) {
        let i = chosen.len();
        if i == poses.len() {
            if self.complete_ok(chosen) {
                self.best = Some(partial);
            }
            return;
        }
        for (s, p) in &poses[i] {
            if self.best.is_some_and(|b| partial + s + self.tail[i + 1] >= b) {
                break;
            }
            if chosen.iter().any(|q| q.bin_index == p.bin_index && !disjoint(p, q)) {
                continue;
            }
            chosen.push(*p);
            self.dfs(poses, chosen, partial + s);
            chosen.pop();
        }
    }

    fn complete_ok(&self, chosen: &[Placement]) -> bool {
        chosen.iter().enumerate().all(|(i, p)| {
            let mut bin = self.bins.iter().find(|b| b.index == p.bin_index).unwrap().clone();
            for (k, q) in chosen.iter().enumerate() {
                if k != i && q.bin_index == p.bin_index {
                    bin.push(*q);
                }
            }
            let cfg = if self.cfg.require_cep { self.cfg } else { self.geometric };
            is_feasible(&bin, p, &cfg).is_ok()
        })
    }
}
