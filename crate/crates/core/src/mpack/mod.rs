//! Rolling-horizon joint optimization of the whole look-ahead.

mod milp;
mod search;
mod step;

pub use milp::{build_milp, export_model, parse_lp, BigM, Constraint, ConstraintTag, MilpModel, ParsedLp, Sense, VarKind, Variable};
pub use search::{solve_joint_exact, JointResult, JointSolution, SearchOptions, DEFAULT_NODE_BUDGET};
pub use step::{mpack_decide, mpack_step, MpackDecision, MpackStats};
