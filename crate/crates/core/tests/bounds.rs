mod common;

use approx::assert_relative_eq;
use common::{arb_params, city, paper, rel, ring};
use paracity::bounds::{g_constant, gap_bounds, kappa, lambda, lambda_sandwich, ring_facts, shortest_path_oracle};
use paracity::city::CityParams;
use paracity::model::build_umcfp;
use proptest::prelude::*;

fn oracle(p: &CityParams<f64>) -> f64 {
    shortest_path_oracle(&build_umcfp(&city(p)))
}

#[test]
fn base_instance_matches_oracle() {
    let p = paper(0.25, 0.5, 0.25);
    let closed = p.t * p.y * lambda(&p).unwrap();
    assert!(rel(closed, oracle(&p)) <= 1e-9, "{closed} vs {}", oracle(&p));
}

#[test]
fn zero_operator_weight_specializes() {
    let p = CityParams { mu: 0.0, ..paper(0.3, 0.3, 0.4) };
    let f = ring_facts(8).unwrap();
    let lateral = p.a * p.gamma + (1.0 - p.a) * p.gamma_tilde();
    let radial = p.a * p.alpha + (1.0 - p.a) * p.alpha_tilde() + p.g * p.a;
    assert_relative_eq!(lambda(&p).unwrap(), f.coefficient * lateral + radial, max_relative = 1e-12);
    let b = gap_bounds(&p).unwrap();
    assert_eq!((b.abs_gap_bound, b.op_cost_floor, b.c_n_ag), (0.0, 0.0, 0.0));
}

#[test]
fn tie_at_six_zones() {
    let f = ring_facts(6).unwrap();
    assert_eq!(f.k, 2);
    assert_relative_eq!(f.r * f.k as f64, 2.0, max_relative = 1e-12);
    for mu in [0.0, 0.5, 1.0] {
        let p = CityParams { n: 6, mu, ..paper(0.2, 0.4, 0.4) };
        assert!(rel(p.t * p.y * lambda(&p).unwrap(), oracle(&p)) <= 1e-9);
    }
}

#[test]
fn oracle_is_linear_in_total_demand() {
    let p = paper(0.1, 0.6, 0.3);
    let half = CityParams { y: p.y / 2.0, ..p };
    assert_relative_eq!(oracle(&p), 2.0 * oracle(&half), max_relative = 1e-12);
    // each zone carries 1/n of the total
    let per_zone = p.t * (p.y / p.n as f64) * lambda(&p).unwrap();
    assert_relative_eq!(oracle(&p), p.n as f64 * per_zone, max_relative = 1e-9);
}

#[test]
fn approximation_constants() {
    assert_relative_eq!(g_constant(1.0f64 / 3.0), 3.0 * (1.0 + 2f64.sqrt()), max_relative = 1e-12);
    assert!((g_constant(1.0f64 / 3.0) - 7.2426).abs() < 1e-4);
    assert!((kappa(1.0f64 / 3.0) - 8.2426).abs() < 1e-4);
    assert!((kappa(1.0f32 / 3.0) - 8.2426).abs() < 1e-3);
}

#[test]
fn base_instance_bounds() {
    let b = gap_bounds(&paper(0.2, 0.5, 0.3)).unwrap();
    assert_relative_eq!(b.abs_gap_bound, 2.0 * 30.0 * (1.0 + ring(8)) * 7.0, max_relative = 1e-12);
    assert!((b.abs_gap_bound - 741.45).abs() < 0.01);
    assert_relative_eq!(b.op_cost_floor, 30.0 * (16.0 / 3.0 + 2.0 + 7.0 * ring(8)), max_relative = 1e-12);
    assert!(b.c_n_ag <= b.c_n + 1e-15);
    assert!(b.c_n <= b.g_const);
}

#[test]
fn ring_facts_hold_up_to_64() {
    let pi = std::f64::consts::PI;
    for n in 4..=64 {
        let f = ring_facts(n).unwrap();
        assert!(f.k as f64 * f.r <= 2.0 + 1e-12, "n={n}");
        assert!((f.k + 1) as f64 * f.r > 2.0, "n={n}");
        assert!(f.ring_share > 0.5 && f.ring_share <= 2.0 + 1e-12, "n={n}");
        let literal = f.ring_share + 2.0 * f.center_share;
        assert!(literal >= 2.0 - 2.0 / pi && literal <= 4.0, "n={n}");
        assert!(f.center_share >= 1.0 - 2.0 / pi - 1e-12 && f.center_share <= 1.0 + 1e-12, "n={n}");
        assert!(f.coefficient >= 2.0 - 2.0 / pi - 1e-12 && f.coefficient <= 4.0 + 1e-12, "n={n}");
    }
    assert!(ring_facts(3).is_err());
}

/// The ring share alone does not stay above 2/pi; only the combined
/// coefficient does.
#[test]
fn ring_share_dips_below_two_over_pi() {
    let low: Vec<usize> = (4..=64)
        .filter(|&n| ring_facts(n).unwrap().ring_share < 2.0 / std::f64::consts::PI)
        .collect();
    assert_eq!(low[..3], [5, 9, 12]);
    assert_relative_eq!(ring_facts(5).unwrap().ring_share, 2.0 * ring(5) / 4.0, max_relative = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_form_matches_oracle(p in arb_params(4..=12)) {
        let closed = p.t * p.y * lambda(&p).unwrap();
        let by_search = oracle(&p);
        prop_assert!(rel(closed, by_search) <= 1e-9, "{} vs {}", closed, by_search);
        let (lo, hi) = lambda_sandwich(&p);
        let l = lambda(&p).unwrap();
        prop_assert!(lo <= l * (1.0 + 1e-12) && l <= hi * (1.0 + 1e-12), "{} <= {} <= {}", lo, l, hi);
    }

    #[test]
    fn bound_chain_is_ordered(p in arb_params(4..=40)) {
        let b = gap_bounds(&p).unwrap();
        prop_assert!(b.lambda_lo <= b.lambda_val * (1.0 + 1e-12));
        prop_assert!(b.lambda_val <= b.lambda_hi * (1.0 + 1e-12));
        prop_assert!(b.c_n_ag <= b.c_n * (1.0 + 1e-12));
        prop_assert!(b.c_n <= b.g_const);
        prop_assert!(b.op_cost_floor >= 0.0 && b.abs_gap_bound >= 0.0);
    }
}
