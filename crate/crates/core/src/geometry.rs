//! Integer-centimeter boxes, orientations and placements.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Opaque box identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxId(pub u32);

impl fmt::Display for BoxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Cuboid dimensions of a box (or a bin) on the 1 cm grid.
///
/// `true_volume` keeps the pre-rounding volume of boxes whose measured sides
/// were not integral; fill rates are reported against it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDims {
    pub id: BoxId,
    pub l: u32,
    pub b: u32,
    pub h: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_volume: Option<f64>,
}

impl BoxDims {
    pub fn new(id: u32, l: u32, b: u32, h: u32) -> Result<Self, Error> {
        if l == 0 || b == 0 || h == 0 {
            return Err(Error::InvalidDims(format!("box {id}: sides must be >= 1 cm, got {l}x{b}x{h}")));
        }
        Ok(Self { id: BoxId(id), l, b, h, true_volume: None })
    }

    /// Builds a box from measured (possibly fractional) sides, rounding each
    /// side up to the next centimeter.
    pub fn from_measured(id: u32, l: f64, b: f64, h: f64) -> Result<Self, Error> {
        let sides = [l, b, h];
        if sides.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidDims(format!("box {id}: sides must be positive, got {l}x{b}x{h}")));
        }
        let [gl, gb, gh] = sides.map(|s| s.ceil() as u32);
        let mut dims = Self::new(id, gl, gb, gh)?;
        if sides.iter().any(|s| s.fract() != 0.0) {
            dims.true_volume = Some(l * b * h);
        }
        Ok(dims)
    }

    pub fn with_true_volume(mut self, v: f64) -> Result<Self, Error> {
        if !(v > 0.0) || v > self.grid_volume() as f64 {
            return Err(Error::InvalidDims(format!(
                "box {}: true volume {v} outside (0, {}]",
                self.id,
                self.grid_volume()
            )));
        }
        self.true_volume = Some(v);
        Ok(self)
    }

    pub fn sides(&self) -> [u32; 3] {
        [self.l, self.b, self.h]
    }

    pub fn grid_volume(&self) -> u64 {
        self.l as u64 * self.b as u64 * self.h as u64
    }

    /// Volume used for fill-rate accounting.
    pub fn accounted_volume(&self) -> f64 {
        self.true_volume.unwrap_or(self.grid_volume() as f64)
    }

    pub fn max_side(&self) -> u32 {
        self.l.max(self.b).max(self.h)
    }

    pub fn min_side(&self) -> u32 {
        self.l.min(self.b).min(self.h)
    }

    /// `max{l,b,h} <= min{L,B,H}`: the box fits the bin in every orientation.
    pub fn packable_in(&self, bin: &BoxDims) -> bool {
        self.max_side() <= bin.min_side()
    }
}

/// Which box side (l, b or h) lies along each bin axis (x, y, z).
///
/// Variant names list the sides along x, y and z in that order, so `Lbh` is
/// the identity and `Bhl` puts b along x, h along y and l along z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Lbh,
    Lhb,
    Blh,
    Bhl,
    Hlb,
    Hbl,
}

impl Orientation {
    /// Canonical scan order.
    pub const ALL: [Orientation; 6] = [
        Orientation::Lbh,
        Orientation::Lhb,
        Orientation::Blh,
        Orientation::Bhl,
        Orientation::Hlb,
        Orientation::Hbl,
    ];

    /// Index of the box side (0 = l, 1 = b, 2 = h) along each bin axis.
    pub fn axis_sides(self) -> [usize; 3] {
        match self {
            Orientation::Lbh => [0, 1, 2],
            Orientation::Lhb => [0, 2, 1],
            Orientation::Blh => [1, 0, 2],
            Orientation::Bhl => [1, 2, 0],
            Orientation::Hlb => [2, 0, 1],
            Orientation::Hbl => [2, 1, 0],
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn bit(self) -> u8 {
        1 << self.index()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Lbh => "lbh",
            Orientation::Lhb => "lhb",
            Orientation::Blh => "blh",
            Orientation::Bhl => "bhl",
            Orientation::Hlb => "hlb",
            Orientation::Hbl => "hbl",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Orientation::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown orientation `{s}` (expected one of lbh, lhb, blh, bhl, hlb, hbl)")))
    }
}

/// Extents of `dims` along the bin's x, y and z axes under `o`.
pub fn orient(dims: &BoxDims, o: Orientation) -> [u32; 3] {
    let sides = dims.sides();
    o.axis_sides().map(|s| sides[s])
}

/// Integer point on the bin grid.
pub type Point = [u32; 3];

/// A box resolved to a pose in an open bin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    #[serde(rename = "box")]
    pub item: BoxDims,
    /// 1-based open-bin index; smaller means opened earlier.
    pub bin_index: usize,
    /// Front-left-bottom corner.
    pub corner: Point,
    pub orientation: Orientation,
    /// Back-right-top corner.
    pub far_corner: Point,
}

impl Placement {
    pub fn new(item: BoxDims, bin_index: usize, corner: Point, orientation: Orientation) -> Self {
        let ext = orient(&item, orientation);
        let far_corner = [corner[0] + ext[0], corner[1] + ext[1], corner[2] + ext[2]];
        Self { item, bin_index, corner, orientation, far_corner }
    }

    pub fn extents(&self) -> [u32; 3] {
        [
            self.far_corner[0] - self.corner[0],
            self.far_corner[1] - self.corner[1],
            self.far_corner[2] - self.corner[2],
        ]
    }

    pub fn id(&self) -> BoxId {
        self.item.id
    }
}
