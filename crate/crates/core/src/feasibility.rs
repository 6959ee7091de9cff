//! Legality of a placement: containment, non-overlap, orientation, support
//! and lateral contact.

use serde::{Deserialize, Serialize};

use crate::bin::{orientation_allowed, BinState, RobotConfig};
use crate::geometry::{BoxId, Placement};

/// Open-interior intersection test on all three axes. Touching faces do not overlap.
pub fn overlaps(a: &Placement, b: &Placement) -> bool {
    boxes_overlap(a.corner, a.far_corner, b.corner, b.far_corner)
}

#[inline]
pub(crate) fn boxes_overlap(a0: [u32; 3], a1: [u32; 3], b0: [u32; 3], b1: [u32; 3]) -> bool {
    (0..3).all(|k| a0[k] < b1[k] && b0[k] < a1[k])
}

/// Number of base vertices (0..=4) of `p` resting on the floor or on the
/// closed top face of a box whose top is exactly at `p`'s base.
pub fn support_count(p: &Placement, bin: &BinState) -> u8 {
    support_count_raw(p.corner, p.far_corner, bin.placements().iter())
}

pub(crate) fn support_count_raw<'a>(
    lo: [u32; 3],
    hi: [u32; 3],
    placed: impl Iterator<Item = &'a Placement>,
) -> u8 {
    if lo[2] == 0 {
        return 4;
    }
    let vertices = [(lo[0], lo[1]), (hi[0], lo[1]), (lo[0], hi[1]), (hi[0], hi[1])];
    let mut supported = [false; 4];
    for q in placed.filter(|q| q.far_corner[2] == lo[2]) {
        for (v, (x, y)) in vertices.iter().enumerate() {
            if !supported[v] && q.corner[0] <= *x && *x <= q.far_corner[0] && q.corner[1] <= *y && *y <= q.far_corner[1] {
                supported[v] = true;
            }
        }
    }
    supported.iter().filter(|s| **s).count() as u8
}

/// Lateral contact direction in the X-Y plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    XNeg,
    XPos,
    YNeg,
    YPos,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::XNeg, Side::XPos, Side::YNeg, Side::YPos];
}

/// Count of distinct lateral directions in which `p` touches a bin wall or
/// shares a positive-area face with a placed box.
pub fn cep_contacts(p: &Placement, bin: &BinState) -> u8 {
    cep_contacts_raw(p.corner, p.far_corner, bin.extents(), bin.placements().iter())
}

pub(crate) fn cep_contacts_raw<'a>(
    lo: [u32; 3],
    hi: [u32; 3],
    walls: [u32; 3],
    placed: impl Iterator<Item = &'a Placement>,
) -> u8 {
    // XNeg, XPos, YNeg, YPos
    let mut touch = [lo[0] == 0, hi[0] == walls[0], lo[1] == 0, hi[1] == walls[1]];
    let span = |a0: u32, a1: u32, b0: u32, b1: u32| a0 < b1 && b0 < a1;
    for q in placed {
        if touch.iter().all(|t| *t) {
            break;
        }
        let z_ok = span(lo[2], hi[2], q.corner[2], q.far_corner[2]);
        if !z_ok {
            continue;
        }
        if span(lo[1], hi[1], q.corner[1], q.far_corner[1]) {
            touch[0] |= q.far_corner[0] == lo[0];
            touch[1] |= q.corner[0] == hi[0];
        }
        if span(lo[0], hi[0], q.corner[0], q.far_corner[0]) {
            touch[2] |= q.far_corner[1] == lo[1];
            touch[3] |= q.corner[1] == hi[1];
        }
    }
    touch.iter().filter(|t| **t).count() as u8
}

/// A failed feasibility clause.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    WrongBin { expected: usize, actual: usize },
    Containment { axis: usize, far: u32, limit: u32 },
    Overlap { with: BoxId },
    Orientation,
    Stability { supported: u8, required: u8 },
    Cep { contacts: u8, required: u8 },
}

/// Result of [`is_feasible`]: every failed clause, empty when legal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub violations: Vec<Violation>,
}

impl FeasibilityVerdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every placement clause and reports all failures.
pub fn is_feasible(bin: &BinState, p: &Placement, cfg: &RobotConfig) -> FeasibilityVerdict {
    let mut violations = Vec::new();
    if p.bin_index != bin.index {
        violations.push(Violation::WrongBin { expected: bin.index, actual: p.bin_index });
    }
    let limits = bin.extents();
    for axis in 0..3 {
        if p.far_corner[axis] > limits[axis] {
            violations.push(Violation::Containment { axis, far: p.far_corner[axis], limit: limits[axis] });
        }
    }
    for q in bin.placements() {
        if overlaps(p, q) {
            violations.push(Violation::Overlap { with: q.id() });
        }
    }
    if !orientation_allowed(&p.item, p.orientation, cfg) {
        violations.push(Violation::Orientation);
    }
    let supported = support_count(p, bin);
    if supported < cfg.min_supported_vertices {
        violations.push(Violation::Stability { supported, required: cfg.min_supported_vertices });
    }
    if cfg.require_cep {
        let contacts = cep_contacts(p, bin);
        if contacts < 2 {
            violations.push(Violation::Cep { contacts, required: 2 });
        }
    }
    FeasibilityVerdict { violations }
}

/// Fast-path check of a pose given by corner and extents: containment,
/// non-overlap and support. Orientation and CEP are the caller's concern.
#[inline]
pub(crate) fn fits_and_supported(bin: &BinState, lo: [u32; 3], ext: [u32; 3], min_support: u8) -> bool {
    let limits = bin.extents();
    let hi = [lo[0] + ext[0], lo[1] + ext[1], lo[2] + ext[2]];
    if (0..3).any(|k| hi[k] > limits[k]) {
        return false;
    }
    if bin.placements().iter().any(|q| boxes_overlap(lo, hi, q.corner, q.far_corner)) {
        return false;
    }
    support_count_raw(lo, hi, bin.placements().iter()) >= min_support
}

/// Boolean equivalent of `is_feasible(..).is_ok()` for a placement in `bin`,
/// ignoring the bin-index clause.
#[cfg(test)]
pub(crate) fn admits(bin: &BinState, p: &Placement, cfg: &RobotConfig) -> bool {
    orientation_allowed(&p.item, p.orientation, cfg)
        && fits_and_supported(bin, p.corner, p.extents(), cfg.min_supported_vertices)
        && (!cfg.require_cep || cep_contacts(p, bin) >= 2)
}
