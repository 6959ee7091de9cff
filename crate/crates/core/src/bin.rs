//! Open-bin state and the robot's placement restrictions.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{orient, BoxDims, Orientation, Placement};

/// One open bin. Placements are append-only; boxes are never reshuffled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinState {
    pub dims: BoxDims,
    /// 1-based open-bin index, reassigned whenever the open set changes.
    pub index: usize,
    /// Opening order across the whole episode; stable for the bin's lifetime.
    pub serial: u64,
    placements: Vec<Placement>,
    packed_volume_true: f64,
    packed_volume_grid: u64,
}

impl BinState {
    pub fn new(dims: BoxDims, index: usize, serial: u64) -> Self {
        Self { dims, index, serial, placements: Vec::new(), packed_volume_true: 0.0, packed_volume_grid: 0 }
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn extents(&self) -> [u32; 3] {
        [self.dims.l, self.dims.b, self.dims.h]
    }

    pub fn volume(&self) -> u64 {
        self.dims.grid_volume()
    }

    pub fn packed_volume_true(&self) -> f64 {
        self.packed_volume_true
    }

    pub fn packed_volume_grid(&self) -> u64 {
        self.packed_volume_grid
    }

    /// Percentage of the bin volume occupied, using true box volumes.
    pub fn fill_rate(&self) -> f64 {
        100.0 * self.packed_volume_true / self.volume() as f64
    }

    /// Appends a placement. Feasibility is the caller's responsibility.
    pub fn push(&mut self, mut p: Placement) {
        p.bin_index = self.index;
        self.packed_volume_grid += p.item.grid_volume();
        self.packed_volume_true += p.item.accounted_volume();
        self.placements.push(p);
    }

    pub(crate) fn pop(&mut self) -> Option<Placement> {
        let p = self.placements.pop()?;
        self.packed_volume_grid -= p.item.grid_volume();
        self.packed_volume_true -= p.item.accounted_volume();
        Some(p)
    }

    /// Top surface height of every `(x, y)` column, row-major in `y`.
    pub fn height_map(&self) -> Vec<u32> {
        let (l, b) = (self.dims.l as usize, self.dims.b as usize);
        let mut map = vec![0u32; l * b];
        for p in &self.placements {
            for y in p.corner[1] as usize..p.far_corner[1] as usize {
                for x in p.corner[0] as usize..p.far_corner[0] as usize {
                    let cell = &mut map[y * l + x];
                    *cell = (*cell).max(p.far_corner[2]);
                }
            }
        }
        map
    }
}

/// Orientation and support restrictions imposed by the packing robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotConfig {
    /// Bit set over [`Orientation::ALL`].
    pub allowed_orientations: u8,
    pub forbid_largest_dim_vertical: bool,
    pub min_supported_vertices: u8,
    pub require_cep: bool,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self { allowed_orientations: 0b11_1111, forbid_largest_dim_vertical: false, min_supported_vertices: 3, require_cep: false }
    }
}

impl RobotConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.allowed_orientations & 0b11_1111 == 0 {
            return Err(Error::Config("at least one orientation must be allowed".into()));
        }
        if !(1..=4).contains(&self.min_supported_vertices) {
            return Err(Error::Config(format!(
                "min_supported_vertices must be in 1..=4, got {}",
                self.min_supported_vertices
            )));
        }
        Ok(())
    }

    pub fn with_orientations(mut self, allowed: &[Orientation]) -> Self {
        self.allowed_orientations = allowed.iter().fold(0, |acc, o| acc | o.bit());
        self
    }

    pub fn allows(&self, o: Orientation) -> bool {
        self.allowed_orientations & o.bit() != 0
    }
}

/// Whether the robot may place `dims` in orientation `o`.
///
/// The upright restriction only applies to a strictly largest side; when two
/// sides tie for largest either may stand vertical.
pub fn orientation_allowed(dims: &BoxDims, o: Orientation, cfg: &RobotConfig) -> bool {
    if !cfg.allows(o) {
        return false;
    }
    if cfg.forbid_largest_dim_vertical {
        let sides = dims.sides();
        let max = dims.max_side();
        let strict = sides.iter().filter(|s| **s == max).count() == 1;
        if strict && orient(dims, o)[2] == max {
            return false;
        }
    }
    true
}
