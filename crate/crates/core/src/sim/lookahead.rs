use std::collections::VecDeque;

use crate::geometry::BoxDims;

/// The boxes visible on the pick conveyor, nearest to the arm first,
/// refilled from the remaining stream after every pick.
#[derive(Clone, Debug, PartialEq)]
pub struct LookAhead {
    window: Vec<BoxDims>,
    capacity: usize,
    source: VecDeque<BoxDims>,
}

impl LookAhead {
    pub fn new(stream: impl IntoIterator<Item = BoxDims>, capacity: usize) -> Self {
        let mut la = Self { window: Vec::with_capacity(capacity), capacity, source: stream.into_iter().collect() };
        la.refill();
        la
    }

    fn refill(&mut self) {
        while self.window.len() < self.capacity {
            match self.source.pop_front() {
                Some(b) => self.window.push(b),
                None => break,
            }
        }
    }

    pub fn window(&self) -> &[BoxDims] {
        &self.window
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn remaining(&self) -> usize {
        self.window.len() + self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Removes the box at `position` and lets the next stream box join at the far end.
    pub fn pick(&mut self, position: usize) -> BoxDims {
        let b = self.window.remove(position);
        self.refill();
        b
    }
}
