//! Solving the two models end to end: building, running branch-and-bound
//! (or an external backend), reading back plans and comparing the optima.

use std::time::Duration;

use paracity_solver::{BranchAndBound, Branching, ExternalSolver, MilpOptions, Solution, SolveStats, SolveStatus, SolverError};
use thiserror::Error;

use crate::city::{CityError, CityInstance};
use crate::model::{build_alpp_sym, build_alpp_with, MilpModel, ModelError, ModelKind, Strengthening};
use crate::symmetry::{orbit_ceiling, FrequencyPlan, GapError, GapReport, RoutingFlow, SymmetryError};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    City(#[from] CityError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error("{model} solve failed: {message}")]
    Failed { model: &'static str, message: String },
}

#[derive(Debug, Clone)]
pub enum Backend {
    BranchAndBound,
    External(ExternalSolver),
}

impl Backend {
    /// External backend if `PARACITY_SOLVER_CMD` is set, built-in otherwise.
    pub fn from_env() -> Self {
        ExternalSolver::from_env().map_or(Backend::BranchAndBound, Backend::External)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions<S> {
    pub gap_tol: S,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub branching: Branching,
    /// Extra valid inequalities for the full model.
    pub strengthening: Strengthening,
    pub backend: Backend,
}

impl<S: Scalar> Default for SolveOptions<S> {
    fn default() -> Self {
        Self {
            gap_tol: S::of(1e-4),
            node_limit: None,
            time_limit: None,
            branching: Branching::Pseudocost,
            strengthening: Strengthening::ALL,
            backend: Backend::from_env(),
        }
    }
}

impl<S: Scalar> SolveOptions<S> {
    fn milp(&self) -> MilpOptions<S> {
        MilpOptions {
            gap_tol: self.gap_tol,
            node_limit: self.node_limit,
            time_limit: self.time_limit,
            branching: self.branching,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelSolution<S> {
    pub kind: ModelKind,
    pub solution: Solution<S>,
    pub plan: Option<FrequencyPlan>,
    pub flow: Option<RoutingFlow<S>>,
}

impl<S: Scalar> ModelSolution<S> {
    pub fn status(&self) -> &SolveStatus {
        &self.solution.status
    }

    pub fn objective(&self) -> Option<S> {
        self.solution.status.has_values().then_some(self.solution.objective)
    }

    pub fn is_infeasible(&self) -> bool {
        self.solution.status == SolveStatus::Infeasible
    }

    pub fn wall(&self) -> Duration {
        self.solution.stats.wall
    }

    fn infeasible(kind: ModelKind) -> Self {
        Self {
            kind,
            solution: Solution::without_values(SolveStatus::Infeasible, SolveStats::default()),
            plan: None,
            flow: None,
        }
    }
}

/// Integer arc frequencies of a solved model, expanded to all arcs.
pub fn extract_frequency_plan<S: Scalar>(model: &MilpModel<S>, sol: &Solution<S>) -> Result<FrequencyPlan, SolveError> {
    if !sol.status.has_values() {
        return Err(SolveError::Failed {
            model: model_name(model.kind),
            message: format!("no values to extract (status {:?})", sol.status),
        });
    }
    Ok(FrequencyPlan::from_values(model.n, &model.arc_frequencies(&sol.values))?)
}

fn model_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Alpp => "ALPP",
        ModelKind::Symmetric => "ALPP3_S",
    }
}

fn finish<S: Scalar>(model: &MilpModel<S>, solution: Solution<S>) -> Result<ModelSolution<S>, SolveError> {
    if let SolveStatus::Error(message) = &solution.status {
        return Err(SolveError::Failed {
            model: model_name(model.kind),
            message: message.clone(),
        });
    }
    let (plan, flow) = if solution.status.has_values() {
        let plan = extract_frequency_plan(model, &solution)?;
        let flow = RoutingFlow {
            n: model.n,
            flows: model.arc_flows(&solution.values),
        };
        (Some(plan), Some(flow))
    } else {
        (None, None)
    };
    Ok(ModelSolution {
        kind: model.kind,
        solution,
        plan,
        flow,
    })
}

fn run<S: Scalar>(
    model: &MilpModel<S>,
    options: &SolveOptions<S>,
    start: Option<Vec<S>>,
    symmetric_rounding: bool,
) -> Result<ModelSolution<S>, SolveError> {
    let solution = match &options.backend {
        Backend::External(ext) => ext.solve(&model.problem)?,
        Backend::BranchAndBound => {
            let mut bb = BranchAndBound::new(&model.problem).options(options.milp());
            if let Some(start) = start {
                bb = bb.start(start);
            }
            if symmetric_rounding {
                bb = bb.heuristic(|x: &[S]| {
                    let plan = orbit_ceiling(model.n, &model.arc_frequencies(x));
                    let flows = model.arc_flows(x);
                    Some(model.values_from(&plan.as_scalars::<S>(), &flows))
                });
            }
            bb.solve()?
        }
    };
    log::debug!(
        "{}: {:?} obj {} bound {} nodes {} in {:?}",
        model_name(model.kind),
        solution.status,
        solution.objective,
        solution.bound,
        solution.stats.nodes,
        solution.stats.wall
    );
    finish(model, solution)
}

/// Solves the three-integer symmetric model. A peripheral frequency above the
/// cap is reported as infeasible without solving.
pub fn solve_alpp_sym<S: Scalar>(city: &CityInstance<S>, options: &SolveOptions<S>) -> Result<ModelSolution<S>, SolveError> {
    match build_alpp_sym(city) {
        Ok(model) => run(&model, options, None, false),
        Err(ModelError::PeripheralCapExceeded { .. }) => Ok(ModelSolution::infeasible(ModelKind::Symmetric)),
    }
}

/// Solves the full model, seeded with a symmetric solution when given (any
/// feasible symmetric plan is feasible for the full model).
pub fn solve_alpp<S: Scalar>(
    city: &CityInstance<S>,
    options: &SolveOptions<S>,
    seed: Option<&ModelSolution<S>>,
) -> Result<ModelSolution<S>, SolveError> {
    let model = build_alpp_with(city, options.strengthening);
    let start = seed.and_then(|s| {
        let plan = s.plan.as_ref()?;
        let flow = s.flow.as_ref()?;
        Some(model.values_from(&plan.as_scalars::<S>(), &flow.flows))
    });
    run(&model, options, start, true)
}

/// Relative difference below which two objectives are re-solved to a zero gap
/// before classification.
pub const NEAR_TIE: f64 = 2e-4;

#[derive(Debug, Clone)]
pub struct PairSolution<S> {
    pub alpp: ModelSolution<S>,
    pub sym: ModelSolution<S>,
    pub report: GapReport<S>,
}

/// Solves both models on the same city and compares them. When the optima
/// are within [`NEAR_TIE`] but not proven equal, both are re-solved with a
/// zero gap tolerance.
pub fn solve_pair<S: Scalar>(city: &CityInstance<S>, options: &SolveOptions<S>) -> Result<PairSolution<S>, SolveError> {
    let sym = solve_alpp_sym(city, options)?;
    let mut alpp = solve_alpp(city, options, Some(&sym))?;
    let mut sym = sym;
    if let (Some(full), Some(s)) = (alpp.objective(), sym.objective()) {
        let proven_equal = s - alpp.solution.bound <= S::of(1e-9) * s.abs();
        let near = (s - full).to_f64_lossy() <= NEAR_TIE * full.abs().to_f64_lossy();
        if near && !proven_equal {
            let exact = SolveOptions {
                gap_tol: S::zero(),
                ..options.clone()
            };
            if sym.solution.gap > S::zero() {
                sym = solve_alpp_sym(city, &exact)?;
            }
            alpp = solve_alpp(city, &exact, Some(&sym))?;
        }
    }
    let report = symmetry_gap(&alpp, &sym)?;
    Ok(PairSolution { alpp, sym, report })
}

/// Gap report from two solved models. Statuses must both carry values or
/// both be infeasible.
pub fn symmetry_gap<S: Scalar>(alpp: &ModelSolution<S>, sym: &ModelSolution<S>) -> Result<GapReport<S>, SolveError> {
    for m in [alpp, sym] {
        if !m.solution.status.has_values() && !m.is_infeasible() {
            return Err(GapError::Unsolved(format!("{:?}", m.solution.status)).into());
        }
    }
    if alpp.kind != ModelKind::Alpp || sym.kind != ModelKind::Symmetric {
        return Err(GapError::MismatchedInstances.into());
    }
    if let (Some(a), Some(b)) = (&alpp.plan, &sym.plan) {
        if a.n != b.n {
            return Err(GapError::MismatchedInstances.into());
        }
    }
    Ok(GapReport::from_values(alpp.objective(), sym.objective())?)
}
