//! Candidate-point generation and the First-Fit / Best-Fit baselines.

use serde::{Deserialize, Serialize};

use crate::bin::{orientation_allowed, BinState, RobotConfig};
use crate::feasibility::{cep_contacts_raw, fits_and_supported};
use crate::geometry::{orient, BoxDims, BoxId, Orientation, Placement, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Origin,
    ExtremePoint,
    FullGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePoint {
    pub bin_index: usize,
    pub point: Point,
    pub provenance: Provenance,
}

/// Which corner positions a placement search may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateMode {
    /// Extreme points of the current packing.
    #[default]
    Extreme,
    /// Every grid point whose height is the floor or the top of a placed box.
    Grid,
}

impl std::str::FromStr for CandidateMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "extreme" | "extreme-points" | "ep" => Ok(CandidateMode::Extreme),
            "grid" | "full-grid" => Ok(CandidateMode::Grid),
            other => Err(crate::Error::Parse(format!("unknown candidate mode `{other}` (expected extreme or grid)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementDecision {
    pub box_id: BoxId,
    pub placement: Placement,
    pub policy_name: String,
    pub score: Option<f64>,
}

fn occupied(bin: &BinState, p: Point) -> bool {
    bin.placements().iter().any(|q| (0..3).all(|k| q.corner[k] <= p[k] && p[k] < q.far_corner[k]))
}

/// Slides `from` towards the origin along `axis` until it meets a box face or the wall.
fn project(bin: &BinState, from: Point, axis: usize) -> Point {
    let (a, c) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let stop = bin
        .placements()
        .iter()
        .filter(|q| {
            q.far_corner[axis] <= from[axis]
                && q.corner[a] <= from[a]
                && from[a] < q.far_corner[a]
                && q.corner[c] <= from[c]
                && from[c] < q.far_corner[c]
        })
        .map(|q| q.far_corner[axis])
        .max()
        .unwrap_or(0);
    let mut p = from;
    p[axis] = stop;
    p
}

/// Extreme points of a bin, deduplicated and sorted by `(z, y, x)`.
///
/// Every placed box contributes its three far-side corners `(x̄,y,z)`,
/// `(x,ȳ,z)`, `(x,y,z̄)` plus each corner projected towards the origin along
/// the two axes it is free to move in. Points outside the bin or inside a box
/// are discarded.
pub fn extreme_points(bin: &BinState) -> Vec<CandidatePoint> {
    if bin.is_empty() {
        return vec![CandidatePoint { bin_index: bin.index, point: [0, 0, 0], provenance: Provenance::Origin }];
    }
    let limits = bin.extents();
    let mut points: Vec<Point> = Vec::with_capacity(bin.placements().len() * 9);
    for q in bin.placements() {
        let [x, y, z] = q.corner;
        let [xb, yb, zb] = q.far_corner;
        for (corner, free) in [([xb, y, z], [1, 2]), ([x, yb, z], [0, 2]), ([x, y, zb], [0, 1])] {
            points.push(corner);
            for axis in free {
                points.push(project(bin, corner, axis));
            }
        }
    }
    points.retain(|p| (0..3).all(|k| p[k] < limits[k]) && !occupied(bin, *p));
    points.sort_unstable_by_key(|p| (p[2], p[1], p[0]));
    points.dedup();
    points
        .into_iter()
        .map(|point| CandidatePoint { bin_index: bin.index, point, provenance: Provenance::ExtremePoint })
        .collect()
}

/// Every grid point at a height where a base could be supported, in `(z, y, x)` order.
pub fn grid_points(bin: &BinState) -> Vec<CandidatePoint> {
    let [l, b, h] = bin.extents();
    let mut heights: Vec<u32> = std::iter::once(0)
        .chain(bin.placements().iter().map(|q| q.far_corner[2]))
        .filter(|z| *z < h)
        .collect();
    heights.sort_unstable();
    heights.dedup();
    let mut out = Vec::with_capacity(heights.len() * (l * b) as usize);
    for z in heights {
        for y in 0..b {
            for x in 0..l {
                out.push(CandidatePoint { bin_index: bin.index, point: [x, y, z], provenance: Provenance::FullGrid });
            }
        }
    }
    out
}

pub fn candidate_points(bin: &BinState, mode: CandidateMode) -> Vec<CandidatePoint> {
    match mode {
        CandidateMode::Extreme => extreme_points(bin),
        CandidateMode::Grid => grid_points(bin),
    }
}

/// Allowed orientations of `item` with duplicate extents removed, in canonical order.
pub fn distinct_orientations(item: &BoxDims, cfg: &RobotConfig) -> Vec<(Orientation, [u32; 3])> {
    let mut out: Vec<(Orientation, [u32; 3])> = Vec::with_capacity(6);
    for o in Orientation::ALL {
        if !orientation_allowed(item, o, cfg) {
            continue;
        }
        let ext = orient(item, o);
        if out.iter().all(|(_, e)| *e != ext) {
            out.push((o, ext));
        }
    }
    out
}

/// Whether a box with extents `ext` may sit at `point` in `bin` under `cfg`
/// (orientation already vetted).
#[inline]
pub(crate) fn pose_ok(bin: &BinState, point: Point, ext: [u32; 3], cfg: &RobotConfig) -> bool {
    if !fits_and_supported(bin, point, ext, cfg.min_supported_vertices) {
        return false;
    }
    if cfg.require_cep {
        let hi = [point[0] + ext[0], point[1] + ext[1], point[2] + ext[2]];
        return cep_contacts_raw(point, hi, bin.extents(), bin.placements().iter()) >= 2;
    }
    true
}

/// First feasible placement in `bin`, scanning candidates in `(z, y, x)` order
/// and orientations in canonical order.
pub fn first_in_bin(bin: &BinState, item: &BoxDims, cfg: &RobotConfig, mode: CandidateMode) -> Option<Placement> {
    let orientations = distinct_orientations(item, cfg);
    candidate_points(bin, mode).into_iter().find_map(|c| {
        orientations
            .iter()
            .find(|(_, ext)| pose_ok(bin, c.point, *ext, cfg))
            .map(|(o, _)| Placement::new(*item, bin.index, c.point, *o))
    })
}

/// First-Fit: the earliest-opened bin that admits the box.
pub fn first_fit(item: &BoxDims, bins: &[BinState], cfg: &RobotConfig) -> Option<PlacementDecision> {
    first_fit_with(item, bins, cfg, CandidateMode::Extreme)
}

pub fn first_fit_with(item: &BoxDims, bins: &[BinState], cfg: &RobotConfig, mode: CandidateMode) -> Option<PlacementDecision> {
    let mut order: Vec<&BinState> = bins.iter().collect();
    order.sort_by_key(|b| b.index);
    order.into_iter().find_map(|bin| first_in_bin(bin, item, cfg, mode)).map(|placement| PlacementDecision {
        box_id: item.id,
        placement,
        policy_name: "FF".into(),
        score: None,
    })
}

/// Best-Fit: the fullest bin that admits the box (ties to the lower index).
pub fn best_fit(item: &BoxDims, bins: &[BinState], cfg: &RobotConfig) -> Option<PlacementDecision> {
    best_fit_with(item, bins, cfg, CandidateMode::Extreme)
}

pub fn best_fit_with(item: &BoxDims, bins: &[BinState], cfg: &RobotConfig, mode: CandidateMode) -> Option<PlacementDecision> {
    let mut order: Vec<&BinState> = bins.iter().collect();
    order.sort_by(|a, b| b.fill_rate().total_cmp(&a.fill_rate()).then(a.index.cmp(&b.index)));
    order.into_iter().find_map(|bin| {
        first_in_bin(bin, item, cfg, mode).map(|placement| PlacementDecision {
            box_id: item.id,
            placement,
            policy_name: "BF".into(),
            score: Some(bin.fill_rate()),
        })
    })
}
