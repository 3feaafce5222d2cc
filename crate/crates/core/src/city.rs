//! The Parametric City: a helm graph with a central district, `n`
//! subcenters on a ring and one periphery node per subcenter.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum CityError {
    #[error("n must be at least 4, got {0}")]
    TooFewZones(usize),
    #[error("{name} = {value} must be {expect}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expect: &'static str,
    },
    #[error("alpha + beta + gamma = {0}, expected 1")]
    SharesDoNotSumToOne(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    /// Central business district.
    Cd,
    /// Subcenter on the ring.
    Sc,
    /// Periphery attached to one subcenter.
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeKind,
    /// Zone index in `0..n`; always 0 for the central district.
    pub index: usize,
}

impl Node {
    pub const CD: Node = Node {
        kind: NodeKind::Cd,
        index: 0,
    };

    pub fn sc(i: usize) -> Self {
        Self {
            kind: NodeKind::Sc,
            index: i,
        }
    }

    pub fn p(i: usize) -> Self {
        Self {
            kind: NodeKind::P,
            index: i,
        }
    }

    /// Dense id: CD = 0, SC_i = 1 + i, P_i = 1 + n + i.
    pub fn id(self, n: usize) -> usize {
        match self.kind {
            NodeKind::Cd => 0,
            NodeKind::Sc => 1 + self.index,
            NodeKind::P => 1 + n + self.index,
        }
    }

    pub fn from_id(id: usize, n: usize) -> Self {
        match id {
            0 => Node::CD,
            i if i <= n => Node::sc(i - 1),
            i => Node::p(i - 1 - n),
        }
    }

    pub fn rotate(self, z: usize, n: usize) -> Self {
        match self.kind {
            NodeKind::Cd => self,
            kind => Node {
                kind,
                index: (self.index + z) % n,
            },
        }
    }

    /// Parses labels such as `CD`, `SC3`, `P0`.
    pub fn parse(label: &str) -> Option<Self> {
        if label == "CD" {
            return Some(Node::CD);
        }
        if let Some(rest) = label.strip_prefix("SC") {
            return rest.parse().ok().map(Node::sc);
        }
        label.strip_prefix('P').and_then(|r| r.parse().ok()).map(Node::p)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Cd => write!(f, "CD"),
            NodeKind::Sc => write!(f, "SC{}", self.index),
            NodeKind::P => write!(f, "P{}", self.index),
        }
    }
}

impl Serialize for NodeLabel {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for NodeLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Node::parse(&s)
            .map(NodeLabel)
            .ok_or_else(|| serde::de::Error::custom(format!("bad node label {s}")))
    }
}

/// A node serialised by its label (`"SC0"`, `"CD"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeLabel(pub Node);

/// The six arc families; every zone `i` owns one arc of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArcKind {
    /// CD -> SC_i
    FromCenter,
    /// SC_i -> CD
    ToCenter,
    /// SC_i -> P_i
    ToPeriphery,
    /// P_i -> SC_i
    FromPeriphery,
    /// SC_i -> SC_{i+1}
    Ccw,
    /// SC_{i+1} -> SC_i
    Cw,
}

impl ArcKind {
    pub const ALL: [ArcKind; 6] = [
        ArcKind::FromCenter,
        ArcKind::ToCenter,
        ArcKind::ToPeriphery,
        ArcKind::FromPeriphery,
        ArcKind::Ccw,
        ArcKind::Cw,
    ];

    pub fn offset(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc<S> {
    pub id: usize,
    pub kind: ArcKind,
    pub zone: usize,
    pub tail: Node,
    pub head: Node,
    pub length: S,
}

/// Arc id for family `kind` in zone `zone`: `6 * zone + kind`.
pub fn arc_id(kind: ArcKind, zone: usize, n: usize) -> usize {
    6 * (zone % n) + kind.offset()
}

/// Rotates an arc id by `z` zones.
pub fn rotate_arc(id: usize, z: usize, n: usize) -> usize {
    (id + 6 * (z % n)) % (6 * n)
}

pub fn rotate_sequence(nodes: &[Node], z: usize, n: usize) -> Vec<Node> {
    nodes.iter().map(|v| v.rotate(z, n)).collect()
}

pub fn arc_endpoints(kind: ArcKind, zone: usize, n: usize) -> (Node, Node) {
    let i = zone % n;
    let next = (i + 1) % n;
    match kind {
        ArcKind::FromCenter => (Node::CD, Node::sc(i)),
        ArcKind::ToCenter => (Node::sc(i), Node::CD),
        ArcKind::ToPeriphery => (Node::sc(i), Node::p(i)),
        ArcKind::FromPeriphery => (Node::p(i), Node::sc(i)),
        ArcKind::Ccw => (Node::sc(i), Node::sc(next)),
        ArcKind::Cw => (Node::sc(next), Node::sc(i)),
    }
}

/// Ring chord factor `r_n = 2 sin(pi/n)` and `k_n = floor(2 / r_n)`.
pub fn geometry_constants<S: Scalar>(n: usize) -> Result<(S, usize), CityError> {
    if n < 4 {
        return Err(CityError::TooFewZones(n));
    }
    let r = 2.0 * (std::f64::consts::PI / n as f64).sin();
    let k = (2.0 / r + 1e-12).floor() as usize;
    Ok((S::of(r), k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "S: Scalar + Deserialize<'de>"))]
pub struct CityParams<S> {
    pub n: usize,
    /// Radius of the subcenter ring.
    #[serde(rename = "T")]
    pub t: S,
    /// Periphery distance as a fraction of `T`.
    pub g: S,
    /// Total demand per period.
    #[serde(rename = "Y")]
    pub y: S,
    /// Share of demand originating in the peripheries.
    pub a: S,
    pub alpha: S,
    pub beta: S,
    pub gamma: S,
    /// Vehicle capacity.
    #[serde(rename = "K")]
    pub k: S,
    /// Frequency cap per arc; `None` picks a non-binding default.
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u64>,
    /// Weight of operator cost against user cost.
    #[serde(default = "default_mu")]
    pub mu: S,
}

fn default_mu<S: Scalar>() -> S {
    S::one()
}

impl<S: Scalar> CityParams<S> {
    pub fn validate(&self) -> Result<(), CityError> {
        if self.n < 4 {
            return Err(CityError::TooFewZones(self.n));
        }
        let positive = [("T", self.t), ("g", self.g), ("Y", self.y), ("K", self.k)];
        for (name, v) in positive {
            if !(v > S::zero() && v.is_finite()) {
                return Err(CityError::OutOfRange {
                    name,
                    value: v.to_f64_lossy(),
                    expect: "positive and finite",
                });
            }
        }
        let open = [
            ("a", self.a),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ];
        for (name, v) in open {
            if !(v > S::zero() && v < S::one()) {
                return Err(CityError::OutOfRange {
                    name,
                    value: v.to_f64_lossy(),
                    expect: "strictly between 0 and 1",
                });
            }
        }
        let sum = self.alpha + self.beta + self.gamma;
        if (sum.to_f64_lossy() - 1.0).abs() > 1e-12_f64.max(4.0 * S::epsilon().to_f64_lossy()) {
            return Err(CityError::SharesDoNotSumToOne(sum.to_f64_lossy()));
        }
        if let Some(l) = self.lambda {
            if l < 1 {
                return Err(CityError::OutOfRange {
                    name: "Lambda",
                    value: l as f64,
                    expect: "at least 1",
                });
            }
        }
        if !(self.mu >= S::zero() && self.mu <= S::one()) {
            return Err(CityError::OutOfRange {
                name: "mu",
                value: self.mu.to_f64_lossy(),
                expect: "within [0, 1]",
            });
        }
        Ok(())
    }

    pub fn alpha_tilde(&self) -> S {
        self.alpha / (self.alpha + self.gamma)
    }

    pub fn gamma_tilde(&self) -> S {
        self.gamma / (self.alpha + self.gamma)
    }

    /// Frequency every peripheral arc needs: `ceil(Y a / (n K))`.
    pub fn peripheral_frequency(&self) -> u64 {
        let v = (self.y * self.a / (S::of(self.n as f64) * self.k)).to_f64_lossy();
        ceil_tol(v)
    }

    /// The configured cap, or `4 * max(ceil(Y a/(n K)), ceil(Y/K))`.
    pub fn lambda_or_default(&self) -> u64 {
        self.lambda.unwrap_or_else(|| {
            let total = ceil_tol((self.y / self.k).to_f64_lossy());
            self.peripheral_frequency().max(total) * 4
        })
    }

    /// Same parameters with different demand shares.
    pub fn with_shares(&self, alpha: S, beta: S, gamma: S) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            ..self.clone()
        }
    }
}

/// Ceiling that ignores floating-point dust just above an integer.
pub(crate) fn ceil_tol(v: f64) -> u64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        v.ceil().max(0.0) as u64
    }
}

/// Dense origin-destination matrix over node ids.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix<S> {
    n: usize,
    d: Vec<S>,
}

impl<S: Scalar> DemandMatrix<S> {
    pub fn zone_count(&self) -> usize {
        self.n
    }

    fn size(&self) -> usize {
        2 * self.n + 1
    }

    pub fn get(&self, from: Node, to: Node) -> S {
        self.d[from.id(self.n) * self.size() + to.id(self.n)]
    }

    /// All pairs with positive demand, ordered by origin id then destination id.
    pub fn pairs(&self) -> Vec<(Node, Node, S)> {
        let size = self.size();
        let mut out = Vec::new();
        for s in 0..size {
            for t in 0..size {
                let v = self.d[s * size + t];
                if v > S::zero() {
                    out.push((Node::from_id(s, self.n), Node::from_id(t, self.n), v));
                }
            }
        }
        out
    }

    /// Total demand leaving `origin`.
    pub fn supply(&self, origin: Node) -> S {
        let size = self.size();
        let s = origin.id(self.n);
        self.d[s * size..(s + 1) * size].iter().copied().sum()
    }

    pub fn total(&self) -> S {
        self.d.iter().copied().sum()
    }
}

pub fn build_demand<S: Scalar>(params: &CityParams<S>) -> Result<DemandMatrix<S>, CityError> {
    params.validate()?;
    let n = params.n;
    let nf = S::of(n as f64);
    let pairs = S::of((n * (n - 1)) as f64);
    let size = 2 * n + 1;
    let mut d = vec![S::zero(); size * size];
    let (y, a) = (params.y, params.a);
    let peri = a * y;
    let sub = (S::one() - a) * y;
    let mut set = |s: Node, t: Node, v: S| d[s.id(n) * size + t.id(n)] = v;
    for i in 0..n {
        set(Node::p(i), Node::sc(i), peri * params.beta / nf);
        set(Node::p(i), Node::CD, peri * params.alpha / nf);
        set(Node::sc(i), Node::CD, sub * params.alpha_tilde() / nf);
        for j in 0..n {
            if j != i {
                set(Node::p(i), Node::sc(j), peri * params.gamma / pairs);
                set(Node::sc(i), Node::sc(j), sub * params.gamma_tilde() / pairs);
            }
        }
    }
    Ok(DemandMatrix { n, d })
}

#[derive(Debug, Clone)]
pub struct CityInstance<S> {
    pub params: CityParams<S>,
    /// `r_n = 2 sin(pi/n)`.
    pub ring_factor: S,
    /// `k_n = floor(2 / r_n)`.
    pub k_n: usize,
    pub nodes: Vec<Node>,
    /// Ordered so that `arcs[arc_id(kind, i, n)]` is the arc of family `kind` in zone `i`.
    pub arcs: Vec<Arc<S>>,
    pub demand: DemandMatrix<S>,
}

pub fn build_city<S: Scalar>(params: &CityParams<S>) -> Result<CityInstance<S>, CityError> {
    params.validate()?;
    let n = params.n;
    let (r, k_n) = geometry_constants::<S>(n)?;
    let nodes = (0..2 * n + 1).map(|id| Node::from_id(id, n)).collect();
    let mut arcs = Vec::with_capacity(6 * n);
    for zone in 0..n {
        for kind in ArcKind::ALL {
            let (tail, head) = arc_endpoints(kind, zone, n);
            let length = match kind {
                ArcKind::FromCenter | ArcKind::ToCenter => params.t,
                ArcKind::ToPeriphery | ArcKind::FromPeriphery => params.g * params.t,
                ArcKind::Ccw | ArcKind::Cw => r * params.t,
            };
            arcs.push(Arc {
                id: arcs.len(),
                kind,
                zone,
                tail,
                head,
                length,
            });
        }
    }
    Ok(CityInstance {
        params: params.clone(),
        ring_factor: r,
        k_n,
        nodes,
        arcs,
        demand: build_demand(params)?,
    })
}

impl<S: Scalar> CityInstance<S> {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn arc(&self, kind: ArcKind, zone: usize) -> &Arc<S> {
        &self.arcs[arc_id(kind, zone, self.n())]
    }

    /// Arc id from its endpoints, if the two nodes are adjacent.
    pub fn find_arc(&self, tail: Node, head: Node) -> Option<usize> {
        let n = self.n();
        let zone_of = |v: Node| v.index % n;
        let candidates = [tail, head]
            .into_iter()
            .filter(|v| v.kind != NodeKind::Cd)
            .map(zone_of)
            .flat_map(|z| [z, (z + n - 1) % n]);
        for z in candidates {
            for kind in ArcKind::ALL {
                if arc_endpoints(kind, z, n) == (tail, head) {
                    return Some(arc_id(kind, z, n));
                }
            }
        }
        None
    }

    /// Commodity origins: SC_0..SC_{n-1} then P_0..P_{n-1}.
    pub fn origins(&self) -> Vec<Node> {
        let n = self.n();
        (0..n).map(Node::sc).chain((0..n).map(Node::p)).collect()
    }

    pub fn total_length(&self, arcs: impl IntoIterator<Item = usize>) -> S {
        arcs.into_iter().map(|a| self.arcs[a].length).sum()
    }
}

/// Commodity index of an origin node in [`CityInstance::origins`] order.
pub fn origin_index(origin: Node, n: usize) -> Option<usize> {
    match origin.kind {
        NodeKind::Cd => None,
        NodeKind::Sc => Some(origin.index % n),
        NodeKind::P => Some(n + origin.index % n),
    }
}
