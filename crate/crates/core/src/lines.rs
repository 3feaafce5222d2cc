//! Lines (simple directed cycles) and line plans: decomposition of integer
//! circulations, the canonical symmetric plan and the LPA algorithm.

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::city::{arc_endpoints, arc_id, ArcKind, CityInstance, CityParams, Node, NodeLabel};
use crate::solve::{solve_alpp_sym, SolveError, SolveOptions};
use crate::symmetry::{FrequencyPlan, RoutingFlow, SymmetricFrequencies};
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum LineError {
    #[error("line needs at least two nodes")]
    TooShort,
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(Node, Node),
    #[error("line visits {0} twice")]
    RepeatedNode(Node),
    #[error("frequency plan is not a circulation (imbalance at {0})")]
    NotCirculation(Node),
}

/// Cyclic node sequence; the closing arc from the last node back to the
/// first is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Line<S> {
    pub nodes: Vec<Node>,
    pub arcs: Vec<usize>,
    pub length: S,
}

impl<S: Scalar> Line<S> {
    pub fn new(nodes: Vec<Node>, city: &CityInstance<S>) -> Result<Self, LineError> {
        if nodes.len() < 2 {
            return Err(LineError::TooShort);
        }
        for (i, v) in nodes.iter().enumerate() {
            if nodes[..i].contains(v) {
                return Err(LineError::RepeatedNode(*v));
            }
        }
        let arcs = (0..nodes.len())
            .map(|i| {
                let (t, h) = (nodes[i], nodes[(i + 1) % nodes.len()]);
                city.find_arc(t, h).ok_or(LineError::NotAdjacent(t, h))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let length = city.total_length(arcs.iter().copied());
        Ok(Self { nodes, arcs, length })
    }

    /// Same cycle started at its smallest node id, for multiset comparison.
    pub fn normalized(&self, n: usize) -> Vec<usize> {
        let ids: Vec<usize> = self.nodes.iter().map(|v| v.id(n)).collect();
        let start = (0..ids.len()).min_by_key(|&i| ids[i]).unwrap_or(0);
        ids[start..].iter().chain(&ids[..start]).copied().collect()
    }

    pub fn rotate(&self, z: usize, n: usize) -> Self {
        Self {
            nodes: crate::city::rotate_sequence(&self.nodes, z, n),
            arcs: self.arcs.iter().map(|&a| crate::city::rotate_arc(a, z, n)).collect(),
            length: self.length,
        }
    }
}

impl<S: Scalar> Serialize for Line<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Line", 2)?;
        let labels: Vec<NodeLabel> = self.nodes.iter().map(|&v| NodeLabel(v)).collect();
        st.serialize_field("nodes", &labels)?;
        st.serialize_field("length", &self.length.to_f64_lossy())?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlan<S> {
    pub n: usize,
    pub entries: Vec<(Line<S>, u64)>,
}

#[derive(Serialize, Deserialize)]
struct LineRecord {
    nodes: Vec<String>,
    frequency: u64,
    length: f64,
}

impl<S: Scalar> Serialize for LinePlan<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        let records: Vec<LineRecord> = self
            .entries
            .iter()
            .map(|(line, f)| LineRecord {
                nodes: line.nodes.iter().map(|v| v.to_string()).collect(),
                frequency: *f,
                length: line.length.to_f64_lossy(),
            })
            .collect();
        records.serialize(s)
    }
}

impl<S: Scalar> LinePlan<S> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Arc frequencies `F_a = sum of f_l over lines through a`.
    pub fn aggregate(&self) -> FrequencyPlan {
        let mut plan = FrequencyPlan::zero(self.n);
        for (line, f) in &self.entries {
            for &a in &line.arcs {
                plan.frequencies[a] += f;
            }
        }
        plan
    }

    /// `sum_l tau_l f_l`.
    pub fn total_length(&self) -> S {
        self.entries
            .iter()
            .map(|(line, f)| line.length * S::of(*f as f64))
            .sum()
    }

    /// Frequency-weighted arc counts per length class `[T, gT, r T]`; equal
    /// profiles mean equal total length without any rounding.
    pub fn length_profile(&self) -> [u64; 3] {
        let mut out = [0; 3];
        for (line, f) in &self.entries {
            for &a in &line.arcs {
                out[length_class(a)] += f;
            }
        }
        out
    }

    /// Multiset of normalized cycles with their frequencies, sorted.
    pub fn canonical_multiset(&self) -> Vec<(Vec<usize>, u64)> {
        let mut v: Vec<_> = self
            .entries
            .iter()
            .map(|(l, f)| (l.normalized(self.n), *f))
            .collect();
        v.sort();
        v
    }

    pub fn rotate(&self, z: usize) -> Self {
        Self {
            n: self.n,
            entries: self.entries.iter().map(|(l, f)| (l.rotate(z, self.n), *f)).collect(),
        }
    }
}

fn length_class(arc: usize) -> usize {
    match ArcKind::ALL[arc % 6] {
        ArcKind::FromCenter | ArcKind::ToCenter => 0,
        ArcKind::ToPeriphery | ArcKind::FromPeriphery => 1,
        ArcKind::Ccw | ArcKind::Cw => 2,
    }
}

/// Same classes as [`LinePlan::length_profile`], for an arc plan.
pub fn plan_length_profile(plan: &FrequencyPlan) -> [u64; 3] {
    let mut out = [0; 3];
    for (a, &f) in plan.frequencies.iter().enumerate() {
        out[length_class(a)] += f;
    }
    out
}

/// Scan order for cycle extraction.
const SCAN_ORDER: [ArcKind; 6] = [
    ArcKind::FromCenter,
    ArcKind::Ccw,
    ArcKind::Cw,
    ArcKind::ToPeriphery,
    ArcKind::FromPeriphery,
    ArcKind::ToCenter,
];

fn scan_order(n: usize) -> Vec<usize> {
    SCAN_ORDER
        .iter()
        .flat_map(|&k| (0..n).map(move |z| arc_id(k, z, n)))
        .collect()
}

/// Splits an integer circulation into simple cycles. Each round takes the
/// first arc with residual frequency, walks forward along the first usable
/// arc at every node until a node repeats, and peels off that cycle at its
/// bottleneck frequency.
pub fn decompose_circulation<S: Scalar>(
    plan: &FrequencyPlan,
    city: &CityInstance<S>,
) -> Result<LinePlan<S>, LineError> {
    let n = plan.n;
    if let Some(v) = plan.conservation_violation() {
        return Err(LineError::NotCirculation(v));
    }
    let order = scan_order(n);
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 1];
    for &a in &order {
        let (t, _) = arc_endpoints(ArcKind::ALL[a % 6], a / 6, n);
        outgoing[t.id(n)].push(a);
    }
    let head = |a: usize| arc_endpoints(ArcKind::ALL[a % 6], a / 6, n).1;
    let mut residual = plan.frequencies.clone();
    let mut entries = Vec::new();
    while let Some(&first) = order.iter().find(|&&a| residual[a] > 0) {
        let (start, _) = arc_endpoints(ArcKind::ALL[first % 6], first / 6, n);
        let mut path_nodes = vec![start];
        let mut path_arcs = vec![first];
        let mut at = head(first);
        let cycle_start = loop {
            if let Some(pos) = path_nodes.iter().position(|&v| v == at) {
                break pos;
            }
            path_nodes.push(at);
            let next = outgoing[at.id(n)]
                .iter()
                .copied()
                .find(|&a| residual[a] > 0)
                .ok_or(LineError::NotCirculation(at))?;
            path_arcs.push(next);
            at = head(next);
        };
        let nodes = path_nodes[cycle_start..].to_vec();
        let arcs = path_arcs[cycle_start..].to_vec();
        let f = arcs.iter().map(|&a| residual[a]).min().unwrap_or(0);
        for &a in &arcs {
            residual[a] -= f;
        }
        let length = city.total_length(arcs.iter().copied());
        entries.push((Line { nodes, arcs, length }, f));
    }
    Ok(LinePlan { n, entries })
}

/// Pendulums `P_i <-> SC_i` at `F_P` and `SC_i <-> CD` at `F_C`, plus one full
/// counterclockwise ring at `F_S+` and one clockwise ring at `F_S-`.
/// Zero-frequency lines are left out.
pub fn canonical_symmetric_lineplan<S: Scalar>(
    sf: &SymmetricFrequencies,
    city: &CityInstance<S>,
) -> LinePlan<S> {
    let n = city.n();
    let mut nodes_with_f: Vec<(Vec<Node>, u64)> = Vec::new();
    if sf.peripheral > 0 {
        nodes_with_f.extend((0..n).map(|i| (vec![Node::p(i), Node::sc(i)], sf.peripheral)));
    }
    if sf.central > 0 {
        nodes_with_f.extend((0..n).map(|i| (vec![Node::sc(i), Node::CD], sf.central)));
    }
    if sf.ccw > 0 {
        nodes_with_f.push(((0..n).map(Node::sc).collect(), sf.ccw));
    }
    if sf.cw > 0 {
        nodes_with_f.push(((0..n).map(|i| Node::sc((n - i) % n)).collect(), sf.cw));
    }
    let entries = nodes_with_f
        .into_iter()
        .map(|(nodes, f)| (Line::new(nodes, city).expect("canonical lines are valid"), f))
        .collect();
    LinePlan { n, entries }
}

#[derive(Debug, Clone)]
pub struct LpaResult<S> {
    pub frequencies: SymmetricFrequencies,
    pub plan: LinePlan<S>,
    pub flow: RoutingFlow<S>,
    pub cost: S,
}

#[derive(Debug, Clone)]
pub enum LpaOutcome<S> {
    Solved(LpaResult<S>),
    Infeasible,
}

/// Solves the symmetric restriction and returns its canonical line plan
/// together with the passenger routing.
pub fn lpa<S: Scalar>(params: &CityParams<S>, options: &SolveOptions<S>) -> Result<LpaOutcome<S>, SolveError> {
    let city = crate::city::build_city(params)?;
    lpa_on(&city, options)
}

pub fn lpa_on<S: Scalar>(city: &CityInstance<S>, options: &SolveOptions<S>) -> Result<LpaOutcome<S>, SolveError> {
    let sol = solve_alpp_sym(city, options)?;
    let (Some(plan), Some(flow)) = (sol.plan, sol.flow) else {
        return Ok(LpaOutcome::Infeasible);
    };
    let frequencies = SymmetricFrequencies::from_plan(&plan).expect("symmetric model yields symmetric plans");
    Ok(LpaOutcome::Solved(LpaResult {
        frequencies,
        plan: canonical_symmetric_lineplan(&frequencies, city),
        flow,
        cost: sol.solution.objective,
    }))
}
