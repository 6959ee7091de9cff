//! Online 3D bin packing with look-ahead for robotic packers.
//!
//! Placements live on a 1 cm grid. [`feasibility::is_feasible`] is the single
//! legality check; the heuristics, [`opack`] framework and [`mpack`] joint
//! search all build on it, and [`sim`] drives them through the conveyor and
//! bin-manager protocol.

pub mod api;
pub mod bin;
pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod heuristics;
pub mod mpack;
pub mod opack;
pub mod policy;
pub mod sim;

pub use bin::{orientation_allowed, BinState, RobotConfig};
pub use error::{Error, Result};
pub use feasibility::{cep_contacts, is_feasible, overlaps, support_count, FeasibilityVerdict, Violation};
pub use geometry::{orient, BoxDims, BoxId, Orientation, Placement, Point};
pub use opack::{SelectionRule, StepOutcome, Weights};
pub use policy::{Policy, PolicyKind};
