//! Optimisation models over a [`CityInstance`]: the arc-based line planning
//! MILP, its three-integer symmetric restriction, and the uncapacitated
//! min-cost flow relaxation.

use paracity_solver::{Problem, VarKind};
use thiserror::Error;

use crate::city::{arc_id, ArcKind, CityInstance, DemandMatrix, Node};
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("peripheral frequency {required} exceeds the frequency cap {cap}")]
    PeripheralCapExceeded { required: u64, cap: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// One integer frequency per arc.
    Alpp,
    /// Integer frequencies `F_C`, `F_S+`, `F_S-`; peripheral frequency fixed.
    Symmetric,
}

/// Optional valid inequalities added to the full model. None of them changes
/// the optimal value; they only tighten the LP relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Strengthening {
    /// Capacity leaving a zone block must cover the demand crossing it.
    pub cut_sets: bool,
    /// SC_0 carries the largest frequency towards CD, and SC_1 at least
    /// as much as SC_{n-1}; removes rotated and mirrored copies.
    pub symmetry_breaking: bool,
    /// Total line length is at least the operator-cost floor.
    pub operator_floor: bool,
}

impl Strengthening {
    pub const NONE: Self = Self {
        cut_sets: false,
        symmetry_breaking: false,
        operator_floor: false,
    };
    pub const ALL: Self = Self {
        cut_sets: true,
        symmetry_breaking: true,
        operator_floor: true,
    };
}

/// Position of the symmetric model's integer variables in `frequency_vars`.
pub const SYM_CENTRAL: usize = 0;
pub const SYM_CCW: usize = 1;
pub const SYM_CW: usize = 2;

#[derive(Debug, Clone)]
pub struct MilpModel<S> {
    pub kind: ModelKind,
    pub problem: Problem<S>,
    pub n: usize,
    /// ALPP: variable index per arc id. Symmetric: `[F_C, F_S+, F_S-]`.
    pub frequency_vars: Vec<usize>,
    /// Fixed peripheral frequency of the symmetric model.
    pub peripheral_frequency: Option<u64>,
    pub origins: Vec<Node>,
    flow_start: usize,
}

impl<S: Scalar> MilpModel<S> {
    pub fn num_arcs(&self) -> usize {
        6 * self.n
    }

    pub fn num_commodities(&self) -> usize {
        self.origins.len()
    }

    pub fn flow_var(&self, commodity: usize, arc: usize) -> usize {
        self.flow_start + commodity * self.num_arcs() + arc
    }

    pub fn is_relaxed(&self) -> bool {
        !self.problem.has_integers()
    }

    /// Per-arc frequencies read from a value vector, expanding the
    /// symmetric model's orbit values to all arcs.
    pub fn arc_frequencies(&self, values: &[S]) -> Vec<S> {
        match self.kind {
            ModelKind::Alpp => self.frequency_vars.iter().map(|&j| values[j]).collect(),
            ModelKind::Symmetric => {
                let fp = S::of(self.peripheral_frequency.unwrap_or(0) as f64);
                let central = values[self.frequency_vars[SYM_CENTRAL]];
                let ccw = values[self.frequency_vars[SYM_CCW]];
                let cw = values[self.frequency_vars[SYM_CW]];
                (0..self.num_arcs())
                    .map(|a| match ArcKind::ALL[a % 6] {
                        ArcKind::FromCenter | ArcKind::ToCenter => central,
                        ArcKind::ToPeriphery | ArcKind::FromPeriphery => fp,
                        ArcKind::Ccw => ccw,
                        ArcKind::Cw => cw,
                    })
                    .collect()
            }
        }
    }

    /// Per-commodity arc flows, `flows[commodity][arc]`.
    pub fn arc_flows(&self, values: &[S]) -> Vec<Vec<S>> {
        (0..self.num_commodities())
            .map(|o| (0..self.num_arcs()).map(|a| values[self.flow_var(o, a)]).collect())
            .collect()
    }

    /// Assembles a value vector for this model from arc frequencies and flows.
    /// For the symmetric model the orbit values are read from zone 0.
    pub fn values_from(&self, frequencies: &[S], flows: &[Vec<S>]) -> Vec<S> {
        let mut x = vec![S::zero(); self.problem.num_vars()];
        match self.kind {
            ModelKind::Alpp => {
                for (a, &j) in self.frequency_vars.iter().enumerate() {
                    x[j] = frequencies[a];
                }
            }
            ModelKind::Symmetric => {
                x[self.frequency_vars[SYM_CENTRAL]] = frequencies[arc_id(ArcKind::FromCenter, 0, self.n)];
                x[self.frequency_vars[SYM_CCW]] = frequencies[arc_id(ArcKind::Ccw, 0, self.n)];
                x[self.frequency_vars[SYM_CW]] = frequencies[arc_id(ArcKind::Cw, 0, self.n)];
            }
        }
        for (o, row) in flows.iter().enumerate() {
            for (a, &v) in row.iter().enumerate() {
                x[self.flow_var(o, a)] = v;
            }
        }
        x
    }
}

fn arc_name<S>(city: &CityInstance<S>, a: usize) -> String {
    format!("{}_{}", city.arcs[a].tail, city.arcs[a].head)
}

/// Adds flow variables and per-origin conservation rows; returns the index of
/// the first flow variable.
fn add_commodities<S: Scalar>(problem: &mut Problem<S>, city: &CityInstance<S>) -> usize {
    let mu = city.params.mu;
    let start = problem.num_vars();
    let origins = city.origins();
    for o in &origins {
        for a in &city.arcs {
            problem.add_var(
                format!("x_{}_{}_{}", o, a.tail, a.head),
                S::zero(),
                S::infinity(),
                (S::one() - mu) * a.length,
                VarKind::Continuous,
            );
        }
    }
    let n = city.n();
    let m = 6 * n;
    for (k, &o) in origins.iter().enumerate() {
        for v in &city.nodes {
            let mut terms = Vec::new();
            for a in &city.arcs {
                if a.tail == *v {
                    terms.push((start + k * m + a.id, S::one()));
                }
                if a.head == *v {
                    terms.push((start + k * m + a.id, -S::one()));
                }
            }
            let rhs = if *v == o {
                city.demand.supply(o)
            } else {
                -city.demand.get(o, *v)
            };
            problem.add_row(format!("flow_{}_{}", o, v), terms, rhs, rhs);
        }
    }
    start
}

/// The arc-based line planning model exactly as stated: frequencies in
/// `[0, Lambda]`, frequency conservation, capacity and routing.
pub fn build_alpp<S: Scalar>(city: &CityInstance<S>) -> MilpModel<S> {
    build_alpp_with(city, Strengthening::NONE)
}

pub fn build_alpp_with<S: Scalar>(city: &CityInstance<S>, extra: Strengthening) -> MilpModel<S> {
    let p = &city.params;
    let n = city.n();
    let lambda = S::of(p.lambda_or_default() as f64);
    let mut problem = Problem::new();
    let frequency_vars: Vec<usize> = city
        .arcs
        .iter()
        .map(|a| {
            problem.add_var(
                format!("F_{}", arc_name(city, a.id)),
                S::zero(),
                lambda,
                p.mu * a.length,
                VarKind::Integer,
            )
        })
        .collect();
    let flow_start = add_commodities(&mut problem, city);
    let m = 6 * n;
    let commodities = 2 * n;
    for a in &city.arcs {
        let mut terms: Vec<(usize, S)> = (0..commodities).map(|o| (flow_start + o * m + a.id, S::one())).collect();
        terms.push((frequency_vars[a.id], -p.k));
        problem.add_row(format!("cap_{}", arc_name(city, a.id)), terms, -S::infinity(), S::zero());
    }
    for v in &city.nodes {
        let mut terms = Vec::new();
        for a in &city.arcs {
            if a.tail == *v {
                terms.push((frequency_vars[a.id], S::one()));
            }
            if a.head == *v {
                terms.push((frequency_vars[a.id], -S::one()));
            }
        }
        problem.add_row(format!("freq_{}", v), terms, S::zero(), S::zero());
    }
    if extra.cut_sets {
        add_cut_sets(&mut problem, city, &frequency_vars);
    }
    if extra.symmetry_breaking {
        let lead = frequency_vars[arc_id(ArcKind::ToCenter, 0, n)];
        for z in 1..n {
            let other = frequency_vars[arc_id(ArcKind::ToCenter, z, n)];
            problem.add_row(
                format!("lead_SC{z}"),
                vec![(lead, S::one()), (other, -S::one())],
                S::zero(),
                S::infinity(),
            );
        }
        let first = frequency_vars[arc_id(ArcKind::ToCenter, 1, n)];
        let last = frequency_vars[arc_id(ArcKind::ToCenter, n - 1, n)];
        problem.add_row(
            "mirror",
            vec![(first, S::one()), (last, -S::one())],
            S::zero(),
            S::infinity(),
        );
    }
    if extra.operator_floor {
        let t = p.t;
        let nf = S::of(n as f64);
        let floor = t * (S::of(2.0) * nf * p.g + S::of(2.0) + (nf - S::one()) * city.ring_factor);
        let terms = city.arcs.iter().map(|a| (frequency_vars[a.id], a.length)).collect();
        problem.add_row("line_length_floor", terms, floor * (S::one() - S::of(1e-12)), S::infinity());
    }
    MilpModel {
        kind: ModelKind::Alpp,
        problem,
        n,
        frequency_vars,
        peripheral_frequency: None,
        origins: city.origins(),
        flow_start,
    }
}

/// Node sets whose boundary capacity is forced by demand: every block of
/// consecutive zones (with and without CD), single subcenters, single
/// peripheries and CD alone.
fn cut_sets(n: usize) -> Vec<Vec<Node>> {
    let mut sets = Vec::new();
    for start in 0..n {
        for len in 1..n {
            let zones: Vec<Node> = (0..len)
                .flat_map(|j| {
                    let z = (start + j) % n;
                    [Node::sc(z), Node::p(z)]
                })
                .collect();
            let mut with_cd = zones.clone();
            with_cd.push(Node::CD);
            sets.push(zones);
            sets.push(with_cd);
        }
    }
    for i in 0..n {
        sets.push(vec![Node::sc(i)]);
        sets.push(vec![Node::p(i)]);
    }
    sets.push(vec![Node::CD]);
    sets
}

fn add_cut_sets<S: Scalar>(problem: &mut Problem<S>, city: &CityInstance<S>, freq: &[usize]) {
    let n = city.n();
    let k = city.params.k;
    for set in cut_sets(n) {
        let mut inside = vec![false; 2 * n + 1];
        for v in &set {
            inside[v.id(n)] = true;
        }
        let (mut out_d, mut in_d) = (S::zero(), S::zero());
        for (s, t, d) in city.demand.pairs() {
            match (inside[s.id(n)], inside[t.id(n)]) {
                (true, false) => out_d = out_d + d,
                (false, true) => in_d = in_d + d,
                _ => {}
            }
        }
        let need = out_d.max(in_d) / k;
        let rhs = S::of(crate::city::ceil_tol(need.to_f64_lossy()) as f64);
        if rhs <= S::zero() {
            continue;
        }
        let terms: Vec<(usize, S)> = city
            .arcs
            .iter()
            .filter(|a| inside[a.tail.id(n)] && !inside[a.head.id(n)])
            .map(|a| (freq[a.id], S::one()))
            .collect();
        let label: Vec<String> = set.iter().map(|v| v.to_string()).collect();
        problem.add_row(format!("cut_{}", label.join("_")), terms, rhs, S::infinity());
    }
}

/// The symmetric model with integer `F_C`, `F_S+`, `F_S-` and the peripheral
/// frequency fixed to `ceil(Y a / (n K))`.
pub fn build_alpp_sym<S: Scalar>(city: &CityInstance<S>) -> Result<MilpModel<S>, ModelError> {
    let p = &city.params;
    let n = city.n();
    let nf = S::of(n as f64);
    let cap = p.lambda_or_default();
    let fp = p.peripheral_frequency();
    if fp > cap {
        return Err(ModelError::PeripheralCapExceeded { required: fp, cap });
    }
    let lambda = S::of(cap as f64);
    let two = S::of(2.0);
    let central_cost = two * nf * p.t;
    let ring_cost = nf * city.ring_factor * p.t;
    let peripheral_cost = two * nf * p.t * p.g;

    let mut problem = Problem::new();
    let fc = problem.add_var("F_C", S::zero(), lambda, p.mu * central_cost, VarKind::Integer);
    let fs_ccw = problem.add_var("F_Splus", S::zero(), lambda, p.mu * ring_cost, VarKind::Integer);
    let fs_cw = problem.add_var("F_Sminus", S::zero(), lambda, p.mu * ring_cost, VarKind::Integer);
    problem.offset = p.mu * peripheral_cost * S::of(fp as f64);
    let flow_start = add_commodities(&mut problem, city);
    let m = 6 * n;
    for a in &city.arcs {
        let mut terms: Vec<(usize, S)> = (0..2 * n).map(|o| (flow_start + o * m + a.id, S::one())).collect();
        let upper = match a.kind {
            ArcKind::FromCenter | ArcKind::ToCenter => {
                terms.push((fc, -p.k));
                S::zero()
            }
            ArcKind::Ccw => {
                terms.push((fs_ccw, -p.k));
                S::zero()
            }
            ArcKind::Cw => {
                terms.push((fs_cw, -p.k));
                S::zero()
            }
            ArcKind::ToPeriphery | ArcKind::FromPeriphery => p.k * S::of(fp as f64),
        };
        problem.add_row(format!("cap_{}", arc_name(city, a.id)), terms, -S::infinity(), upper);
    }
    Ok(MilpModel {
        kind: ModelKind::Symmetric,
        problem,
        n,
        frequency_vars: vec![fc, fs_ccw, fs_cw],
        peripheral_frequency: Some(fp),
        origins: city.origins(),
        flow_start,
    })
}

/// Same model with integrality dropped.
pub fn build_lp_relaxation<S: Scalar>(model: &MilpModel<S>) -> MilpModel<S> {
    MilpModel {
        problem: model.problem.relaxed(),
        ..model.clone()
    }
}

/// Uncapacitated min-cost flow: every passenger pays a per-arc price that
/// folds the operator cost of carrying them into the fare.
#[derive(Debug, Clone)]
pub struct UmcfpInstance<S> {
    pub n: usize,
    /// Price per passenger on each arc, indexed by arc id.
    pub costs: Vec<S>,
    pub demand: DemandMatrix<S>,
}

pub fn build_umcfp<S: Scalar>(city: &CityInstance<S>) -> UmcfpInstance<S> {
    let p = &city.params;
    let one_minus = S::one() - p.mu;
    let single = p.mu / p.k + one_minus;
    let double = S::of(2.0) * p.mu / p.k + one_minus;
    let costs = city
        .arcs
        .iter()
        .map(|a| match a.kind {
            ArcKind::FromPeriphery => double * p.t * p.g,
            ArcKind::ToPeriphery => one_minus * p.t * p.g,
            ArcKind::Ccw | ArcKind::Cw => single * city.ring_factor * p.t,
            ArcKind::ToCenter => double * p.t,
            ArcKind::FromCenter => one_minus * p.t,
        })
        .collect();
    UmcfpInstance {
        n: city.n(),
        costs,
        demand: city.demand.clone(),
    }
}

impl<S: Scalar> UmcfpInstance<S> {
    /// All-pairs cheapest path prices by Floyd-Warshall, indexed by node id.
    pub fn path_costs(&self) -> Vec<Vec<S>> {
        let n = self.n;
        let size = 2 * n + 1;
        let mut dist = vec![vec![S::infinity(); size]; size];
        for (v, row) in dist.iter_mut().enumerate() {
            row[v] = S::zero();
        }
        for zone in 0..n {
            for kind in ArcKind::ALL {
                let (t, h) = crate::city::arc_endpoints(kind, zone, n);
                let c = self.costs[arc_id(kind, zone, n)];
                let cell = &mut dist[t.id(n)][h.id(n)];
                *cell = cell.min(c);
            }
        }
        for k in 0..size {
            for i in 0..size {
                let dik = dist[i][k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..size {
                    let via = dik + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        dist
    }

    /// Optimal value: each demand routed on its cheapest path.
    pub fn optimum(&self) -> S {
        let dist = self.path_costs();
        self.demand
            .pairs()
            .into_iter()
            .map(|(s, t, d)| d * dist[s.id(self.n)][t.id(self.n)])
            .sum()
    }

    /// Arc-flow LP of the same problem, for cross-checking.
    pub fn to_problem(&self, city: &CityInstance<S>) -> Problem<S> {
        let mut problem = Problem::new();
        let n = self.n;
        let m = 6 * n;
        let origins = city.origins();
        for o in &origins {
            for a in &city.arcs {
                problem.add_var(
                    format!("x_{}_{}_{}", o, a.tail, a.head),
                    S::zero(),
                    S::infinity(),
                    self.costs[a.id],
                    VarKind::Continuous,
                );
            }
        }
        for (k, &o) in origins.iter().enumerate() {
            for v in &city.nodes {
                let mut terms = Vec::new();
                for a in &city.arcs {
                    if a.tail == *v {
                        terms.push((k * m + a.id, S::one()));
                    }
                    if a.head == *v {
                        terms.push((k * m + a.id, -S::one()));
                    }
                }
                let rhs = if *v == o {
                    self.demand.supply(o)
                } else {
                    -self.demand.get(o, *v)
                };
                problem.add_row(format!("flow_{}_{}", o, v), terms, rhs, rhs);
            }
        }
        problem
    }
}
