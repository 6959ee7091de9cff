use serde::{Deserialize, Serialize};

use crate::bin::BinState;
use crate::error::{Error, Result};
use crate::geometry::{BoxDims, BoxId, Placement};

/// A bin taken off the line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedBin {
    pub bin: BinState,
    pub fill_rate: f64,
}

/// Keeps a fixed number of bins open. A bin is always closed before a new
/// one is opened, and open bins are re-indexed `1..=n` in opening order.
#[derive(Clone, Debug, PartialEq)]
pub struct BinManager {
    dims: BoxDims,
    capacity: usize,
    open: Vec<BinState>,
    closed: Vec<ClosedBin>,
    next_serial: u64,
}

impl BinManager {
    pub fn new(dims: BoxDims, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("at least one bin must be open".into()));
        }
        let dims = BoxDims { id: BoxId(0), true_volume: None, ..dims };
        let open = (0..capacity).map(|k| BinState::new(dims, k + 1, k as u64)).collect();
        Ok(Self { dims, capacity, open, closed: Vec::new(), next_serial: capacity as u64 })
    }

    pub fn bin_dims(&self) -> BoxDims {
        self.dims
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn open(&self) -> &[BinState] {
        &self.open
    }

    pub fn closed(&self) -> &[ClosedBin] {
        &self.closed
    }

    /// Commits a placement to its open bin and returns that bin's serial.
    pub fn commit(&mut self, p: Placement) -> u64 {
        let bin = &mut self.open[p.bin_index - 1];
        debug_assert_eq!(bin.index, p.bin_index);
        bin.push(p);
        bin.serial
    }

    /// Closes the fullest open bin (ties to the lower index) and opens a fresh one.
    pub fn close_fullest_and_open(&mut self) -> u64 {
        let pos = self
            .open
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.fill_rate().total_cmp(&b.fill_rate()).then(b.index.cmp(&a.index)))
            .map(|(k, _)| k)
            .expect("manager always has open bins");
        let bin = self.open.remove(pos);
        let serial = bin.serial;
        self.closed.push(ClosedBin { fill_rate: bin.fill_rate(), bin });
        for (k, b) in self.open.iter_mut().enumerate() {
            b.index = k + 1;
        }
        self.open.push(BinState::new(self.dims, self.open.len() + 1, self.next_serial));
        self.next_serial += 1;
        serial
    }

    /// Closes every non-empty open bin, returning them in opening order.
    pub fn drain_open(&mut self) -> Vec<ClosedBin> {
        let mut rest: Vec<ClosedBin> = std::mem::take(&mut self.open)
            .into_iter()
            .filter(|b| !b.is_empty())
            .map(|bin| ClosedBin { fill_rate: bin.fill_rate(), bin })
            .collect();
        rest.sort_by_key(|c| c.bin.serial);
        rest
    }
}
