//! Rotation action on solutions: symmetrisation, symmetry tests and the
//! constructions that turn partially symmetric solutions into symmetric ones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::city::{arc_id, rotate_arc, ArcKind, CityInstance, Node};
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum SymmetryError {
    #[error("frequency plan violates conservation at {0}")]
    NotConserved(Node),
    #[error("frequency {value} on arc {arc} exceeds cap {cap}")]
    AboveCap { arc: usize, value: u64, cap: u64 },
    #[error("flow of commodity {commodity} is not conserved at {node} (off by {excess})")]
    FlowImbalance { commodity: Node, node: Node, excess: f64 },
    #[error("negative flow on arc {arc} for commodity {commodity}")]
    NegativeFlow { commodity: Node, arc: usize },
    #[error("arc {arc} carries {load} passengers but offers only {capacity}")]
    OverCapacity { arc: usize, load: f64, capacity: f64 },
    #[error("value {0} is not integral")]
    NotIntegral(f64),
    #[error("plan is not arc-symmetric")]
    NotArcSymmetric,
    #[error("flow is not rotation invariant")]
    NotPathSymmetric,
    #[error("plan and flow belong to different zone counts")]
    SizeMismatch,
}

/// Integer frequency per arc, indexed by arc id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    pub n: usize,
    pub frequencies: Vec<u64>,
}

impl FrequencyPlan {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            frequencies: vec![0; 6 * n],
        }
    }

    /// Rounds values lying within the scalar's integrality tolerance of an
    /// integer (at least `1e-6`); anything further off is an error.
    pub fn from_values<S: Scalar>(n: usize, values: &[S]) -> Result<Self, SymmetryError> {
        let tol = S::integrality_tol().to_f64_lossy().max(1e-6);
        let frequencies = values
            .iter()
            .map(|&v| {
                let v = v.to_f64_lossy();
                let r = v.round();
                if (v - r).abs() > tol || r < 0.0 {
                    Err(SymmetryError::NotIntegral(v))
                } else {
                    Ok(r as u64)
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { n, frequencies })
    }

    pub fn get(&self, kind: ArcKind, zone: usize) -> u64 {
        self.frequencies[arc_id(kind, zone, self.n)]
    }

    pub fn as_scalars<S: Scalar>(&self) -> Vec<S> {
        self.frequencies.iter().map(|&f| S::of(f as f64)).collect()
    }

    /// First node where outgoing and incoming frequency differ.
    pub fn conservation_violation(&self) -> Option<Node> {
        let n = self.n;
        let mut balance = vec![0i64; 2 * n + 1];
        for zone in 0..n {
            for kind in ArcKind::ALL {
                let (t, h) = crate::city::arc_endpoints(kind, zone, n);
                let f = self.get(kind, zone) as i64;
                balance[t.id(n)] += f;
                balance[h.id(n)] -= f;
            }
        }
        balance.iter().position(|&b| b != 0).map(|id| Node::from_id(id, n))
    }

    /// `sum_a tau_a F_a`.
    pub fn line_length<S: Scalar>(&self, city: &CityInstance<S>) -> S {
        city.arcs
            .iter()
            .map(|a| a.length * S::of(self.frequencies[a.id] as f64))
            .sum()
    }

    pub fn operator_cost<S: Scalar>(&self, city: &CityInstance<S>) -> S {
        city.params.mu * self.line_length(city)
    }

    pub fn rotate(&self, z: usize) -> Self {
        let mut out = vec![0; self.frequencies.len()];
        for (a, &f) in self.frequencies.iter().enumerate() {
            out[rotate_arc(a, z, self.n)] = f;
        }
        Self {
            n: self.n,
            frequencies: out,
        }
    }
}

/// Per-origin passenger flow, `flows[commodity][arc]` with commodities in
/// [`CityInstance::origins`] order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutingFlow<S> {
    pub n: usize,
    pub flows: Vec<Vec<S>>,
}

/// Commodity index after rotating its origin by `z`.
fn rotate_commodity(o: usize, z: usize, n: usize) -> usize {
    if o < n {
        (o + z) % n
    } else {
        n + (o - n + z) % n
    }
}

impl<S: Scalar> RoutingFlow<S> {
    pub fn arc_totals(&self) -> Vec<S> {
        let m = 6 * self.n;
        (0..m).map(|a| self.flows.iter().map(|row| row[a]).sum()).collect()
    }

    /// `sum_a tau_a sum_o x^o_a`.
    pub fn passenger_length(&self, city: &CityInstance<S>) -> S {
        self.arc_totals()
            .iter()
            .zip(&city.arcs)
            .map(|(&y, a)| y * a.length)
            .sum()
    }

    pub fn user_cost(&self, city: &CityInstance<S>) -> S {
        (S::one() - city.params.mu) * self.passenger_length(city)
    }

    /// Moves commodity `o` to the rotated origin and every arc to its rotation.
    pub fn rotate(&self, z: usize) -> Self {
        let n = self.n;
        let m = 6 * n;
        let mut flows = vec![vec![S::zero(); m]; self.flows.len()];
        for (o, row) in self.flows.iter().enumerate() {
            let ro = rotate_commodity(o, z, n);
            for (a, &v) in row.iter().enumerate() {
                flows[ro][rotate_arc(a, z, n)] = v;
            }
        }
        Self { n, flows }
    }

    /// Average of all `n` rotations.
    pub fn averaged(&self) -> Self {
        let n = self.n;
        let m = 6 * n;
        let mut flows = vec![vec![S::zero(); m]; self.flows.len()];
        for z in 0..n {
            for (o, row) in self.flows.iter().enumerate() {
                let ro = rotate_commodity(o, z, n);
                for (a, &v) in row.iter().enumerate() {
                    let ra = rotate_arc(a, z, n);
                    flows[ro][ra] = flows[ro][ra] + v;
                }
            }
        }
        let nf = S::of(n as f64);
        for row in &mut flows {
            for v in row.iter_mut() {
                *v = *v / nf;
            }
        }
        Self { n, flows }
    }
}

/// The four orbit frequencies of an arc-symmetric plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricFrequencies {
    pub peripheral: u64,
    pub central: u64,
    pub ccw: u64,
    pub cw: u64,
}

impl SymmetricFrequencies {
    pub fn expand(&self, n: usize) -> FrequencyPlan {
        let frequencies = (0..6 * n)
            .map(|a| match ArcKind::ALL[a % 6] {
                ArcKind::FromCenter | ArcKind::ToCenter => self.central,
                ArcKind::ToPeriphery | ArcKind::FromPeriphery => self.peripheral,
                ArcKind::Ccw => self.ccw,
                ArcKind::Cw => self.cw,
            })
            .collect();
        FrequencyPlan { n, frequencies }
    }

    /// Collapses an arc-symmetric plan; `None` if the plan is not one.
    pub fn from_plan(plan: &FrequencyPlan) -> Option<Self> {
        if !is_arc_symmetric(plan) {
            return None;
        }
        let sf = Self {
            peripheral: plan.get(ArcKind::ToPeriphery, 0),
            central: plan.get(ArcKind::ToCenter, 0),
            ccw: plan.get(ArcKind::Ccw, 0),
            cw: plan.get(ArcKind::Cw, 0),
        };
        (sf.expand(plan.n) == *plan).then_some(sf)
    }
}

/// True iff every arc carries the same frequency as all its rotations.
pub fn is_arc_symmetric(plan: &FrequencyPlan) -> bool {
    let n = plan.n;
    (0..6 * n).all(|a| plan.frequencies[a] == plan.frequencies[a % 6])
}

/// Rotation invariance of the per-orbit arc totals: summing the flows of
/// all subcenter commodities (and separately all periphery commodities)
/// gives the same value on every arc of an orbit.
pub fn is_path_symmetric<S: Scalar>(flow: &RoutingFlow<S>, tol: S) -> bool {
    let n = flow.n;
    let m = 6 * n;
    for group in [0..n, n..2 * n] {
        let totals: Vec<S> = (0..m)
            .map(|a| group.clone().map(|o| flow.flows[o][a]).sum())
            .collect();
        for a in 0..m {
            let base = totals[a % 6];
            if (totals[a] - base).abs() > tol * (S::one() + base.abs()) {
                return false;
            }
        }
    }
    true
}

/// Checks every constraint of the line planning model for `(plan, flow)`.
/// `tol` is an absolute slack on flow balances and capacities.
pub fn check_feasible<S: Scalar>(
    city: &CityInstance<S>,
    plan: &FrequencyPlan,
    flow: &RoutingFlow<S>,
    tol: S,
) -> Result<(), SymmetryError> {
    let n = city.n();
    if plan.n != n || flow.n != n || flow.flows.len() != 2 * n {
        return Err(SymmetryError::SizeMismatch);
    }
    if let Some(v) = plan.conservation_violation() {
        return Err(SymmetryError::NotConserved(v));
    }
    let cap = city.params.lambda_or_default();
    for (a, &f) in plan.frequencies.iter().enumerate() {
        if f > cap {
            return Err(SymmetryError::AboveCap { arc: a, value: f, cap });
        }
    }
    let origins = city.origins();
    for (o, row) in flow.flows.iter().enumerate() {
        let origin = origins[o];
        let mut balance = vec![S::zero(); 2 * n + 1];
        for a in &city.arcs {
            let x = row[a.id];
            if x < -tol {
                return Err(SymmetryError::NegativeFlow {
                    commodity: origin,
                    arc: a.id,
                });
            }
            balance[a.tail.id(n)] = balance[a.tail.id(n)] + x;
            balance[a.head.id(n)] = balance[a.head.id(n)] - x;
        }
        for v in &city.nodes {
            let want = if *v == origin {
                city.demand.supply(origin)
            } else {
                -city.demand.get(origin, *v)
            };
            let excess = balance[v.id(n)] - want;
            if excess.abs() > tol {
                return Err(SymmetryError::FlowImbalance {
                    commodity: origin,
                    node: *v,
                    excess: excess.to_f64_lossy(),
                });
            }
        }
    }
    let k = city.params.k;
    for (a, load) in flow.arc_totals().into_iter().enumerate() {
        let capacity = k * S::of(plan.frequencies[a] as f64);
        if load > capacity + tol {
            return Err(SymmetryError::OverCapacity {
                arc: a,
                load: load.to_f64_lossy(),
                capacity: capacity.to_f64_lossy(),
            });
        }
    }
    Ok(())
}

/// Orbit-wise `ceil(mean)` of possibly fractional frequencies, with a small
/// tolerance so that values a hair above an integer do not round up.
///
/// The two central orbits have equal means for any conserving input, as do
/// the two peripheral ones; they are rounded as a pair so that noise in an
/// LP solution cannot break conservation of the result.
pub fn orbit_ceiling<S: Scalar>(n: usize, frequencies: &[S]) -> FrequencyPlan {
    let nf = S::of(n as f64);
    let mean = |kind: ArcKind| {
        let k = kind.offset();
        ((0..n).map(|z| frequencies[6 * z + k]).sum::<S>() / nf).to_f64_lossy().max(0.0)
    };
    let up = crate::city::ceil_tol;
    let sf = SymmetricFrequencies {
        peripheral: up(mean(ArcKind::ToPeriphery).max(mean(ArcKind::FromPeriphery))),
        central: up(mean(ArcKind::ToCenter).max(mean(ArcKind::FromCenter))),
        ccw: up(mean(ArcKind::Ccw)),
        cw: up(mean(ArcKind::Cw)),
    };
    sf.expand(n)
}

/// Symmetrises a feasible solution: every orbit gets the rounded-up mean
/// frequency and passengers follow the average of all rotated flows.
pub fn symmetrize<S: Scalar>(
    plan: &FrequencyPlan,
    flow: &RoutingFlow<S>,
    city: &CityInstance<S>,
    tol: S,
) -> Result<(FrequencyPlan, RoutingFlow<S>), SymmetryError> {
    check_feasible(city, plan, flow, tol)?;
    Ok((orbit_ceiling(plan.n, &plan.as_scalars::<S>()), flow.averaged()))
}

/// For an arc-symmetric plan, replaces the flow by its rotation average,
/// which stays feasible and keeps the cost.
pub fn symmetric_flow_from_symmetric_plan<S: Scalar>(
    plan: &FrequencyPlan,
    flow: &RoutingFlow<S>,
    city: &CityInstance<S>,
    tol: S,
) -> Result<RoutingFlow<S>, SymmetryError> {
    if !is_arc_symmetric(plan) {
        return Err(SymmetryError::NotArcSymmetric);
    }
    check_feasible(city, plan, flow, tol)?;
    Ok(flow.averaged())
}

/// For a rotation-invariant flow, sizes each orbit to the load on its zone-0
/// arc: `F_C = ceil(Y(SC0,CD)/K)`, `F_S+ = ceil(Y(SC0,SC1)/K)`,
/// `F_S- = ceil(Y(SC0,SC_{n-1})/K)`, peripheral frequency kept from the plan.
pub fn symmetric_plan_from_symmetric_flow<S: Scalar>(
    flow: &RoutingFlow<S>,
    plan: &FrequencyPlan,
    city: &CityInstance<S>,
    tol: S,
) -> Result<FrequencyPlan, SymmetryError> {
    let n = city.n();
    if !is_path_symmetric(flow, tol) {
        return Err(SymmetryError::NotPathSymmetric);
    }
    check_feasible(city, plan, flow, tol)?;
    let totals = flow.arc_totals();
    let k = city.params.k;
    let load = |kind: ArcKind, zone: usize| (totals[arc_id(kind, zone, n)] / k).to_f64_lossy();
    let sf = SymmetricFrequencies {
        peripheral: plan.get(ArcKind::FromPeriphery, 0),
        central: crate::city::ceil_tol(load(ArcKind::ToCenter, 0)),
        ccw: crate::city::ceil_tol(load(ArcKind::Ccw, 0)),
        cw: crate::city::ceil_tol(load(ArcKind::Cw, n - 1)),
    };
    Ok(sf.expand(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Symmetric,
    Asymmetric,
    Infeasible,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Symmetric => "symmetric",
            Classification::Asymmetric => "asymmetric",
            Classification::Infeasible => "infeasible",
        }
    }
}

/// Relative gap at or below which an instance counts as symmetric.
pub const CLASSIFICATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport<S> {
    pub opt_alpp: S,
    pub opt_alpps: S,
    pub gamma_abs: S,
    pub gamma_rel: S,
    pub classification: Classification,
}

impl<S: Scalar> GapReport<S> {
    /// Builds the report from the two optimal values; `None` marks an
    /// infeasible model.
    pub fn from_values(opt_alpp: Option<S>, opt_alpps: Option<S>) -> Result<Self, GapError> {
        match (opt_alpp, opt_alpps) {
            (None, None) => Ok(Self {
                opt_alpp: S::nan(),
                opt_alpps: S::nan(),
                gamma_abs: S::zero(),
                gamma_rel: S::zero(),
                classification: Classification::Infeasible,
            }),
            (Some(full), Some(sym)) => {
                let gamma_abs = sym - full;
                let gamma_rel = gamma_abs / full;
                let classification = if gamma_rel.to_f64_lossy() <= CLASSIFICATION_TOL {
                    Classification::Symmetric
                } else {
                    Classification::Asymmetric
                };
                Ok(Self {
                    opt_alpp: full,
                    opt_alpps: sym,
                    gamma_abs,
                    gamma_rel,
                    classification,
                })
            }
            _ => Err(GapError::OneSidedInfeasibility),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GapError {
    #[error("exactly one of the two models is infeasible")]
    OneSidedInfeasibility,
    #[error("solutions come from different instances")]
    MismatchedInstances,
    #[error("solution status {0} cannot enter a gap report")]
    Unsolved(String),
}
