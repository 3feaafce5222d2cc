//! Small LP/MILP solver: a bounded dual simplex with an explicit basis
//! inverse, best-first branch-and-bound on top of it, an LP-format writer and
//! a file-based bridge to external solvers.

mod error;
pub mod external;
pub mod lpformat;
pub mod milp;
mod problem;
mod scalar;
pub mod simplex;
mod solution;

pub use error::SolverError;
pub use external::ExternalSolver;
pub use lpformat::write_lp;
pub use milp::{solve_lp, solve_milp, BranchAndBound, Branching, MilpOptions, Progress};
pub use problem::{Problem, Row, VarKind, Variable};
pub use scalar::Scalar;
pub use solution::{SolveStats, SolveStatus, Solution};
