//! Box collection generators: certified synthetic tilings and an
//! industrial-style sampler.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{orient, BoxDims, Orientation, Placement};

/// Default side bounds for synthetic collections in the 80x45x45 bin.
pub const SYNTHETIC_MIN_SIDE: u32 = 14;
pub const SYNTHETIC_MAX_SIDE: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BinType {
    Ldc,
    Rc,
    Pal,
    Eq,
    Syn,
}

impl BinType {
    pub const ALL: [BinType; 5] = [BinType::Ldc, BinType::Rc, BinType::Pal, BinType::Eq, BinType::Syn];

    pub fn dims(self) -> [u32; 3] {
        match self {
            BinType::Ldc => [120, 80, 80],
            BinType::Rc => [120, 70, 160],
            BinType::Pal => [220, 120, 80],
            BinType::Eq => [80, 80, 80],
            BinType::Syn => [80, 45, 45],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BinType::Ldc => "LDC",
            BinType::Rc => "RC",
            BinType::Pal => "PAL",
            BinType::Eq => "EQ",
            BinType::Syn => "SYN",
        }
    }
}

impl fmt::Display for BinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BinType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BinType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown bin type `{s}` (valid: LDC, RC, PAL, EQ, SYN)")))
    }
}

/// A synthetic collection plus the placements it was cut from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCollection {
    pub boxes: Vec<BoxDims>,
    /// One placement per box; `bin_index` numbers the source bins from 1.
    /// Sorted so replaying in order keeps every box supported.
    pub certificate: Vec<Placement>,
}

/// True iff `n` splits into integer pieces each within `[lo, hi]`.
fn decomposable(n: u32, lo: u32, hi: u32) -> bool {
    // k pieces cover exactly [k*lo, k*hi]
    let k = n.div_ceil(hi);
    k >= 1 && k * lo <= n
}

struct Cutter<'a> {
    lo: u32,
    hi: u32,
    rng: &'a mut ChaCha8Rng,
}

impl Cutter<'_> {
    fn cut(&mut self, origin: [u32; 3], size: [u32; 3], out: &mut Vec<([u32; 3], [u32; 3])>) {
        let forced: Vec<usize> = (0..3).filter(|&a| size[a] > self.hi).collect();
        if forced.is_empty() {
            out.push((origin, size));
            return;
        }
        let axis = forced[self.rng.gen_range(0..forced.len())];
        let n = size[axis];
        let cuts: Vec<u32> =
            (self.lo..=n - self.lo).filter(|&t| decomposable(t, self.lo, self.hi) && decomposable(n - t, self.lo, self.hi)).collect();
        let t = cuts[self.rng.gen_range(0..cuts.len())];
        let mut first = size;
        first[axis] = t;
        let mut second = size;
        second[axis] = n - t;
        let mut second_origin = origin;
        second_origin[axis] += t;
        self.cut(origin, first, out);
        self.cut(second_origin, second, out);
    }
}

/// Cuts `n_bins` copies of `bin` into boxes with every side in
/// `[min_side, max_side]`; the boxes tile each bin exactly.
pub fn gen_synthetic(bin: [u32; 3], n_bins: usize, min_side: u32, max_side: u32, seed: u64) -> Result<SyntheticCollection> {
    if n_bins == 0 {
        return Err(Error::Config("a collection needs at least one bin".into()));
    }
    if min_side == 0 || min_side > max_side {
        return Err(Error::Config(format!("side bounds [{min_side}, {max_side}] are empty or start at 0")));
    }
    if bin.contains(&0) {
        return Err(Error::Config("bin sides must be positive".into()));
    }
    let bin_min = *bin.iter().min().expect("three sides");
    if max_side > bin_min {
        return Err(Error::Config(format!("max side {max_side} exceeds the smallest bin side {bin_min}")));
    }
    for side in bin {
        if !decomposable(side, min_side, max_side) {
            return Err(Error::Config(format!(
                "bin side {side} cannot be cut into pieces between {min_side} and {max_side}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boxes = Vec::new();
    let mut certificate = Vec::new();
    for bin_no in 1..=n_bins {
        let mut pieces = Vec::new();
        Cutter { lo: min_side, hi: max_side, rng: &mut rng }.cut([0, 0, 0], bin, &mut pieces);
        pieces.sort_by_key(|(o, _)| [o[2], o[1], o[0]]);
        for (origin, extents) in pieces {
            // the cut orientation must not leak into the side labels
            let mut sides = extents;
            sides.shuffle(&mut rng);
            let item = BoxDims::new(boxes.len() as u32 + 1, sides[0], sides[1], sides[2])?;
            let orientation = Orientation::ALL
                .into_iter()
                .find(|&o| orient(&item, o) == extents)
                .expect("some orientation restores the cut extents");
            boxes.push(item);
            certificate.push(Placement::new(item, bin_no, origin, orientation));
        }
    }
    Ok(SyntheticCollection { boxes, certificate })
}

/// Side distribution for industrial-style collections.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndustrialDistribution {
    pub min_side: f64,
    pub max_side: f64,
}

impl Default for IndustrialDistribution {
    fn default() -> Self {
        Self { min_side: 10.0, max_side: 60.0 }
    }
}

/// Samples log-uniform sides (one decimal) until the accumulated true
/// volume reaches `target_bins` bin volumes.
pub fn gen_industrial_like(bin_type: BinType, target_bins: usize, seed: u64) -> Result<Vec<BoxDims>> {
    gen_industrial_with(bin_type, target_bins, IndustrialDistribution::default(), seed)
}

pub fn gen_industrial_with(
    bin_type: BinType,
    target_bins: usize,
    dist: IndustrialDistribution,
    seed: u64,
) -> Result<Vec<BoxDims>> {
    if target_bins == 0 {
        return Err(Error::Config("a collection needs at least one bin".into()));
    }
    let dims = bin_type.dims();
    let bin_min = *dims.iter().min().expect("three sides") as f64;
    let hi = dist.max_side.min(bin_min);
    if !(dist.min_side > 0.0 && dist.min_side <= hi) {
        return Err(Error::Config(format!("side range [{}, {hi}] is empty", dist.min_side)));
    }
    let target = target_bins as f64 * dims.iter().map(|&s| s as f64).product::<f64>();
    let (ln_lo, ln_hi) = (dist.min_side.ln(), hi.ln());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    let mut boxes = Vec::new();
    while total < target {
        let mut side = || {
            let s = (rng.gen_range(ln_lo..=ln_hi).exp() * 10.0).round() / 10.0;
            s.clamp(dist.min_side, hi)
        };
        let (l, b, h) = (side(), side(), side());
        let true_volume = l * b * h;
        let item = BoxDims::from_measured(boxes.len() as u32 + 1, l, b, h)?.with_true_volume(true_volume)?;
        total += true_volume;
        boxes.push(item);
    }
    Ok(boxes)
}
