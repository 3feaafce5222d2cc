//! Closed-form values: the uncapacitated flow optimum, its demand-free
//! sandwich, the symmetry gap bounds and the approximation factor.

use serde::Serialize;

use crate::city::{arc_endpoints, geometry_constants, ArcKind, CityError, CityParams, Node};
use crate::model::UmcfpInstance;
use crate::Scalar;

/// `lambda(alpha, gamma)`: the uncapacitated optimum divided by `T Y`.
///
/// Destinations on the ring at hop distance `j <= k_n` are reached along the
/// ring, the remaining `n - 2 k_n - 1` through CD.
pub fn lambda<S: Scalar>(params: &CityParams<S>) -> Result<S, CityError> {
    params.validate()?;
    let (r, k) = geometry_constants::<S>(params.n)?;
    let n = params.n as f64;
    let kf = k as f64;
    let coefficient = (S::of(kf * (kf + 1.0)) * r + S::of(2.0 * (n - 2.0 * kf - 1.0))) / S::of(n - 1.0);
    Ok(lambda_with_coefficient(params, coefficient))
}

fn lambda_with_coefficient<S: Scalar>(params: &CityParams<S>, ring: S) -> S {
    let (mu, kk, a, g) = (params.mu, params.k, params.a, params.g);
    let one = S::one();
    let single = mu / kk + (one - mu);
    let double = S::of(2.0) * mu / kk + (one - mu);
    let lateral = a * params.gamma + (one - a) * params.gamma_tilde();
    let radial = a * params.alpha + (one - a) * params.alpha_tilde() + g * a;
    ring * single * lateral + double * radial
}

/// Demand-free lower and upper bounds on `lambda`.
pub fn lambda_sandwich<S: Scalar>(params: &CityParams<S>) -> (S, S) {
    let (mu, kk, a, g) = (params.mu, params.k, params.a, params.g);
    let one = S::one();
    let pi = S::of(std::f64::consts::PI);
    let two = S::of(2.0);
    let lo = (one + g * a - a) * ((two - two / pi) * mu / kk + one - mu);
    let hi = S::of(4.0) * (one + g * a) * (two * mu / kk + one - mu);
    (lo, hi)
}

/// Sum over all demand pairs of demand times the cheapest price, with
/// prices found by a label-setting search from every origin.
pub fn shortest_path_oracle<S: Scalar>(umcfp: &UmcfpInstance<S>) -> S {
    let n = umcfp.n;
    let size = 2 * n + 1;
    let mut out: Vec<Vec<(usize, S)>> = vec![Vec::new(); size];
    for zone in 0..n {
        for kind in ArcKind::ALL {
            let (t, h) = arc_endpoints(kind, zone, n);
            out[t.id(n)].push((h.id(n), umcfp.costs[crate::city::arc_id(kind, zone, n)]));
        }
    }
    let mut total = S::zero();
    for source in 0..size {
        let origin = Node::from_id(source, n);
        if umcfp.demand.supply(origin) <= S::zero() {
            continue;
        }
        let dist = label_setting(&out, source);
        for (target, &d) in dist.iter().enumerate() {
            let demand = umcfp.demand.get(origin, Node::from_id(target, n));
            if demand > S::zero() {
                total = total + demand * d;
            }
        }
    }
    total
}

fn label_setting<S: Scalar>(out: &[Vec<(usize, S)>], source: usize) -> Vec<S> {
    let size = out.len();
    let mut dist = vec![S::infinity(); size];
    let mut done = vec![false; size];
    dist[source] = S::zero();
    for _ in 0..size {
        let Some(u) = (0..size)
            .filter(|&v| !done[v] && dist[v].is_finite())
            .min_by(|&x, &y| dist[x].partial_cmp(&dist[y]).unwrap().then(x.cmp(&y)))
        else {
            break;
        };
        done[u] = true;
        for &(v, c) in &out[u] {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet<S> {
    pub umcfp_opt: S,
    pub lambda_val: S,
    pub lambda_lo: S,
    pub lambda_hi: S,
    pub abs_gap_bound: S,
    pub op_cost_floor: S,
    pub c_n_ag: S,
    pub c_n: S,
    pub g_const: S,
    pub kappa: S,
}

impl<S: Scalar> BoundSet<S> {
    pub fn entries(&self) -> [(&'static str, S); 10] {
        [
            ("umcfp_opt", self.umcfp_opt),
            ("lambda_val", self.lambda_val),
            ("lambda_lo", self.lambda_lo),
            ("lambda_hi", self.lambda_hi),
            ("abs_gap_bound", self.abs_gap_bound),
            ("op_cost_floor", self.op_cost_floor),
            ("c_n_ag", self.c_n_ag),
            ("c_n", self.c_n),
            ("g_const", self.g_const),
            ("kappa", self.kappa),
        ]
    }
}

/// `(1 + sqrt 2) / g`.
pub fn g_constant<S: Scalar>(g: S) -> S {
    (S::one() + S::of(2f64.sqrt())) / g
}

/// Worst-case ratio of the symmetric line plan against the optimum.
pub fn kappa<S: Scalar>(g: S) -> S {
    S::one() + g_constant(g)
}

pub fn gap_bounds<S: Scalar>(params: &CityParams<S>) -> Result<BoundSet<S>, CityError> {
    let lambda_val = lambda(params)?;
    let (lambda_lo, lambda_hi) = lambda_sandwich(params);
    let (r, _) = geometry_constants::<S>(params.n)?;
    let one = S::one();
    let two = S::of(2.0);
    let nm1 = S::of(params.n as f64 - 1.0);
    let (mu, t, g, y) = (params.mu, params.t, params.g, params.y);
    let abs_gap_bound = two * mu * t * (one + r) * nm1;
    let op_cost_floor = mu * t * (two * S::of(params.n as f64) * g + two + nm1 * r);
    let geometric = two * (one + r) / (two * g + r);
    let demand_term = |lam: S| two * mu * (one + r) * nm1 / (y * lam);
    Ok(BoundSet {
        umcfp_opt: t * y * lambda_val,
        lambda_val,
        lambda_lo,
        lambda_hi,
        abs_gap_bound,
        op_cost_floor,
        c_n_ag: demand_term(lambda_val).min(geometric),
        c_n: demand_term(lambda_lo).min(geometric),
        g_const: g_constant(g),
        kappa: kappa(g),
    })
}

/// Per-`n` quantities used when bounding `lambda` independently of demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingFacts {
    pub n: usize,
    pub r: f64,
    pub k: usize,
    /// `k_n (k_n + 1) r_n / (n - 1)`.
    pub ring_share: f64,
    /// `(n - 2 k_n + 1) / (n - 1)`.
    pub center_share: f64,
    /// `[k_n (k_n + 1) r_n + 2 (n - 2 k_n - 1)] / (n - 1)`, the ring
    /// coefficient actually appearing in `lambda`.
    pub coefficient: f64,
}

pub fn ring_facts(n: usize) -> Result<RingFacts, CityError> {
    let (r, k) = geometry_constants::<f64>(n)?;
    let (nf, kf) = (n as f64, k as f64);
    Ok(RingFacts {
        n,
        r,
        k,
        ring_share: kf * (kf + 1.0) * r / (nf - 1.0),
        center_share: (nf - 2.0 * kf + 1.0) / (nf - 1.0),
        coefficient: (kf * (kf + 1.0) * r + 2.0 * (nf - 2.0 * kf - 1.0)) / (nf - 1.0),
    })
}
