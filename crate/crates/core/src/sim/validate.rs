//! Trace replay against an occupancy grid, independent of the placement
//! code paths: every cell records which box fills it, and support is read
//! off the cells directly below each base vertex.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::geometry::{orient, BoxDims, BoxId};

use super::trace::Trace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TraceIssue {
    StepOrder { expected: u64, found: u64 },
    UnknownBox,
    DuplicateBox,
    Unplaced,
    Containment,
    Overlap { with: BoxId },
    Orientation,
    Stability { supported: u8, required: u8 },
    Cep { contacts: u8 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceViolation {
    /// Step of the offending record; 0 for collection-level issues.
    pub step: u64,
    pub box_id: BoxId,
    pub issue: TraceIssue,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: usize,
    pub violations: Vec<TraceViolation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, pred: impl Fn(&TraceIssue) -> bool) -> usize {
        self.violations.iter().filter(|v| pred(&v.issue)).count()
    }
}

struct Grid {
    dims: [usize; 3],
    owner: Vec<u32>,
}

impl Grid {
    fn new(dims: [usize; 3]) -> Self {
        Self { dims, owner: vec![0; dims[0] * dims[1] * dims[2]] }
    }

    fn at(&self, x: usize, y: usize, z: usize) -> u32 {
        self.owner[(z * self.dims[1] + y) * self.dims[0] + x]
    }

    fn any_in(&self, xs: Range<usize>, ys: Range<usize>, zs: Range<usize>) -> bool {
        zs.into_iter().any(|z| ys.clone().any(|y| xs.clone().any(|x| self.at(x, y, z) != 0)))
    }

    fn set(&mut self, x: usize, y: usize, z: usize, v: u32) {
        let k = (z * self.dims[1] + y) * self.dims[0] + x;
        self.owner[k] = v;
    }
}

/// Replays `trace` and lists every rule it breaks.
pub fn validate_trace(trace: &Trace) -> ValidationReport {
    let cfg = &trace.header.config;
    let robot = &cfg.robot;
    let dims = cfg.bin_dims.map(|d| d as usize);
    let by_id: HashMap<BoxId, &BoxDims> = trace.header.boxes.iter().map(|b| (b.id, b)).collect();
    let mut grids: HashMap<u64, Grid> = HashMap::new();
    let mut seen: HashSet<BoxId> = HashSet::new();
    let mut violations = Vec::new();
    let mut expected = 1;

    for (k, rec) in trace.records.iter().enumerate() {
        let mut flag = |issue| violations.push(TraceViolation { step: rec.step, box_id: rec.box_id, issue });
        if rec.step != expected {
            flag(TraceIssue::StepOrder { expected, found: rec.step });
        }
        expected = rec.step.max(expected) + 1;
        let Some(item) = by_id.get(&rec.box_id) else {
            flag(TraceIssue::UnknownBox);
            continue;
        };
        if !seen.insert(rec.box_id) {
            flag(TraceIssue::DuplicateBox);
            continue;
        }

        let ext = orient(item, rec.orientation);
        let max = *item.sides().iter().max().expect("three sides");
        let strict_max = item.sides().iter().filter(|&&s| s == max).count() == 1;
        if !robot.allows(rec.orientation) || (robot.forbid_largest_dim_vertical && strict_max && ext[2] == max) {
            flag(TraceIssue::Orientation);
        }

        let lo = rec.corner.map(|c| c as usize);
        let hi: Vec<usize> = (0..3).map(|a| lo[a] + ext[a] as usize).collect();
        if (0..3).any(|a| hi[a] > dims[a]) {
            flag(TraceIssue::Containment);
            continue;
        }

        let grid = grids.entry(rec.bin_serial).or_insert_with(|| Grid::new(dims));
        let me = k as u32 + 1;
        let mut hit = Vec::new();
        for z in lo[2]..hi[2] {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    let o = grid.at(x, y, z);
                    if o != 0 && !hit.contains(&o) {
                        hit.push(o);
                    }
                }
            }
        }

        // support: a base vertex rests on box m when one of the up to four
        // cells around it just below the base belongs to m and m ends there
        let supported = if lo[2] == 0 {
            4
        } else {
            let z = lo[2];
            let mut n = 0;
            for vx in [lo[0], hi[0]] {
                for vy in [lo[1], hi[1]] {
                    let mut ok = false;
                    for cx in vx.saturating_sub(1)..=vx {
                        for cy in vy.saturating_sub(1)..=vy {
                            if cx >= dims[0] || cy >= dims[1] {
                                continue;
                            }
                            let m = grid.at(cx, cy, z - 1);
                            if m != 0 && (z == dims[2] || grid.at(cx, cy, z) != m) {
                                ok = true;
                            }
                        }
                    }
                    n += ok as u8;
                }
            }
            n
        };

        let contacts = robot.require_cep.then(|| {
            let (xs, ys, zs) = (lo[0]..hi[0], lo[1]..hi[1], lo[2]..hi[2]);
            let sides = [
                lo[0] == 0 || grid.any_in(lo[0] - 1..lo[0], ys.clone(), zs.clone()),
                hi[0] == dims[0] || grid.any_in(hi[0]..hi[0] + 1, ys.clone(), zs.clone()),
                lo[1] == 0 || grid.any_in(xs.clone(), lo[1] - 1..lo[1], zs.clone()),
                hi[1] == dims[1] || grid.any_in(xs, hi[1]..hi[1] + 1, zs),
            ];
            sides.iter().filter(|&&s| s).count() as u8
        });

        for o in hit {
            let with = trace.records[o as usize - 1].box_id;
            violations.push(TraceViolation { step: rec.step, box_id: rec.box_id, issue: TraceIssue::Overlap { with } });
        }
        if supported < robot.min_supported_vertices {
            violations.push(TraceViolation {
                step: rec.step,
                box_id: rec.box_id,
                issue: TraceIssue::Stability { supported, required: robot.min_supported_vertices },
            });
        }
        if let Some(c) = contacts.filter(|&c| c < 2) {
            violations.push(TraceViolation { step: rec.step, box_id: rec.box_id, issue: TraceIssue::Cep { contacts: c } });
        }

        for z in lo[2]..hi[2] {
            for y in lo[1]..hi[1] {
                for x in lo[0]..hi[0] {
                    if grid.at(x, y, z) == 0 {
                        grid.set(x, y, z, me);
                    }
                }
            }
        }
    }

    for b in &trace.header.boxes {
        if !seen.contains(&b.id) {
            violations.push(TraceViolation { step: 0, box_id: b.id, issue: TraceIssue::Unplaced });
        }
    }
    ValidationReport { records: trace.records.len(), violations }
}
