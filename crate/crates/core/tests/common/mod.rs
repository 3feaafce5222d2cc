#![allow(dead_code)]

use paracity::city::{build_city, CityInstance, CityParams};
use paracity::solve::{Backend, SolveOptions};
use paracity::solver::Branching;
use paracity::model::Strengthening;
use proptest::prelude::*;

/// The experimental setting: n=8, T=30, g=1/3, Y=24000, a=0.8, K=100, mu=1.
pub fn paper(alpha: f64, beta: f64, gamma: f64) -> CityParams<f64> {
    CityParams {
        n: 8,
        t: 30.0,
        g: 1.0 / 3.0,
        y: 24000.0,
        a: 0.8,
        alpha,
        beta,
        gamma,
        k: 100.0,
        lambda: None,
        mu: 1.0,
    }
}

/// One vehicle carries all passengers and peripheries are close.
pub fn extreme(n: usize) -> CityParams<f64> {
    CityParams {
        n,
        t: 30.0,
        g: 1.0 / n as f64,
        y: 1000.0,
        a: 0.8,
        alpha: 0.2,
        beta: 0.5,
        gamma: 0.3,
        k: 1000.0,
        lambda: None,
        mu: 1.0,
    }
}

pub fn city(p: &CityParams<f64>) -> CityInstance<f64> {
    build_city(p).unwrap()
}

/// Built-in solver regardless of the environment.
pub fn options() -> SolveOptions<f64> {
    SolveOptions {
        gap_tol: 1e-4,
        node_limit: None,
        time_limit: None,
        branching: Branching::Pseudocost,
        strengthening: Strengthening::ALL,
        backend: Backend::BranchAndBound,
    }
}

pub fn ring(n: usize) -> f64 {
    2.0 * (std::f64::consts::PI / n as f64).sin()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Random valid parameters; shares at least 0.02 each.
pub fn arb_params(zones: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CityParams<f64>> {
    (
        zones,
        1.0..100.0f64,
        0.05..2.0f64,
        100.0..50000.0f64,
        0.05..0.95f64,
        (0.02..0.96f64, 0.02..0.96f64).prop_filter("beta > 0", |(a, g)| a + g < 0.98),
        1.0..500.0f64,
        0.0..=1.0f64,
    )
        .prop_map(|(n, t, g, y, a, (alpha, gamma), k, mu)| CityParams {
            n,
            t,
            g,
            y,
            a,
            alpha,
            beta: 1.0 - alpha - gamma,
            gamma,
            k,
            lambda: None,
            mu,
        })
}
