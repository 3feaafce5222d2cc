use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A node or time limit stopped the search with an incumbent in hand.
    GapLimit,
    Error(String),
}

impl SolveStatus {
    pub fn has_values(&self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::GapLimit)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub status: SolveStatus,
    pub objective: S,
    /// One value per problem variable; empty unless the status carries values.
    pub values: Vec<S>,
    /// Best proven lower bound on the optimum.
    pub bound: S,
    pub gap: S,
    pub stats: SolveStats,
}

impl<S: crate::Scalar> Solution<S> {
    pub fn without_values(status: SolveStatus, stats: SolveStats) -> Self {
        Self {
            status,
            objective: S::nan(),
            values: Vec::new(),
            bound: S::nan(),
            gap: S::nan(),
            stats,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
