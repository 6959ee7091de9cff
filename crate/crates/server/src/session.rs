use binpack3d_core::api::{BinSummary, SessionPlacement, SessionRequest, SessionState, StepResponse};
use binpack3d_core::sim::BinManager;
use binpack3d_core::{BinState, BoxDims, Error, Policy, StepOutcome};

use crate::error::ApiError;

/// One online packer: open bins plus the boxes currently on the conveyor window.
pub struct Session {
    policy: Policy,
    lookahead: usize,
    manager: BinManager,
    window: Vec<BoxDims>,
}

impl Session {
    pub fn new(req: &SessionRequest) -> Result<Self, ApiError> {
        if !(1..=6).contains(&req.lookahead) {
            return Err(Error::Config(format!("look-ahead must be in 1..=6, got {}", req.lookahead)).into());
        }
        req.policy.robot.validate()?;
        req.policy.weights.validate()?;
        let [l, b, h] = req.bin;
        let bin = BoxDims::new(0, l, b, h)?;
        Ok(Self {
            policy: req.policy,
            lookahead: req.lookahead,
            manager: BinManager::new(bin, req.open_bins)?,
            window: Vec::new(),
        })
    }

    pub fn step(&mut self, arrivals: Vec<BoxDims>) -> Result<StepResponse, ApiError> {
        if self.window.len() + arrivals.len() > self.lookahead {
            return Err(Error::Config(format!(
                "window holds {} boxes; {} more exceed look-ahead {}",
                self.window.len(),
                arrivals.len(),
                self.lookahead
            ))
            .into());
        }
        for (i, a) in arrivals.iter().enumerate() {
            if self.window.iter().chain(&arrivals[..i]).any(|w| w.id == a.id) {
                return Err(Error::Config(format!("box {} is already on the conveyor", a.id)).into());
            }
        }
        self.window.extend(arrivals);
        if self.window.is_empty() {
            return Ok(StepResponse { placed: None, window: Vec::new() });
        }
        let mut closed_serials = Vec::new();
        loop {
            match self.policy.decide(self.manager.open(), &self.window).outcome {
                StepOutcome::Placed { position, placement } => {
                    self.window.remove(position);
                    let bin_serial = self.manager.commit(placement);
                    let placed = SessionPlacement { position, placement, bin_serial, closed_serials };
                    return Ok(StepResponse { placed: Some(placed), window: self.window.clone() });
                }
                StepOutcome::Exhausted => {
                    if self.manager.open().iter().all(BinState::is_empty) {
                        return Err(Error::Protocol("no box on the conveyor fits an empty bin".into()).into());
                    }
                    closed_serials.push(self.manager.close_fullest_and_open());
                }
            }
        }
    }

    pub fn state(&self, id: &str) -> SessionState {
        SessionState {
            id: id.to_string(),
            window: self.window.clone(),
            open: self.manager.open().iter().map(summary).collect(),
            closed: self.manager.closed().iter().map(|c| summary(&c.bin)).collect(),
        }
    }

    /// Final state with every non-empty open bin closed.
    pub fn finish(&self, id: &str) -> SessionState {
        let mut state = self.state(id);
        let mut open = std::mem::take(&mut state.open);
        open.retain(|b| b.boxes > 0);
        open.sort_by_key(|b| b.serial);
        state.closed.extend(open);
        state
    }
}

fn summary(b: &BinState) -> BinSummary {
    BinSummary { serial: b.serial, index: b.index, boxes: b.placements().len(), fill_rate: b.fill_rate() }
}
