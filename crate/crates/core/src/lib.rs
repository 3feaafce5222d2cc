//! Line planning in the Parametric City: instance construction, the arc-based
//! MILP and its rotation-symmetric restriction, closed-form bounds, line plan
//! decomposition and parameter sweeps.

pub mod bounds;
pub mod city;
pub mod config;
pub mod lines;
pub mod model;
pub mod solve;
pub mod sweep;
pub mod symmetry;

pub use paracity_solver as solver;
pub use paracity_solver::Scalar;

pub type CityParams = city::CityParams<f64>;
pub type CityInstance = city::CityInstance<f64>;
pub type MilpModel = model::MilpModel<f64>;
pub type RoutingFlow = symmetry::RoutingFlow<f64>;
pub type GapReport = symmetry::GapReport<f64>;
pub type BoundSet = bounds::BoundSet<f64>;
pub type LinePlan = lines::LinePlan<f64>;
pub type SolveOptions = solve::SolveOptions<f64>;
pub type ModelSolution = solve::ModelSolution<f64>;
