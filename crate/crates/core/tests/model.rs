mod common;

use approx::assert_relative_eq;
use common::{arb_params, city, paper, ring};
use paracity::city::{arc_id, ArcKind, CityParams};
use paracity::model::{
    build_alpp, build_alpp_sym, build_alpp_with, build_lp_relaxation, build_umcfp, ModelError, ModelKind,
    Strengthening, SYM_CCW, SYM_CENTRAL, SYM_CW,
};
use paracity::solver::{solve_lp, solve_milp, write_lp, MilpOptions, SolveStatus, VarKind};
use proptest::prelude::*;

#[test]
fn alpp_dimensions() {
    let m = build_alpp(&city(&paper(0.2, 0.5, 0.3)));
    assert_eq!(m.kind, ModelKind::Alpp);
    assert_eq!(m.problem.integer_vars().len(), 48);
    assert_eq!(m.num_commodities(), 16);
    assert_eq!(m.problem.num_vars(), 48 + 48 * 16);
    // capacity per arc, frequency conservation per node, routing per (origin, node)
    assert_eq!(m.problem.num_rows(), 48 + 17 + 16 * 17);
    for &j in &m.frequency_vars {
        let v = &m.problem.vars[j];
        assert_eq!((v.lower, v.upper), (0.0, 960.0));
    }
}

#[test]
fn names_follow_the_scheme() {
    let m = build_alpp(&city(&paper(0.2, 0.5, 0.3)));
    let names: Vec<&str> = m.problem.vars.iter().map(|v| v.name.as_str()).collect();
    assert!(names.contains(&"F_SC0_CD"));
    assert!(names.contains(&"F_SC7_SC0"));
    assert!(names.contains(&"x_P3_SC3_CD"));
    assert_eq!(m.problem.vars[m.flow_var(11, arc_id(ArcKind::ToCenter, 3, 8))].name, "x_P3_SC3_CD");
}

#[test]
fn operator_weight_one_zeroes_flow_costs() {
    let m = build_alpp(&city(&paper(0.2, 0.5, 0.3)));
    for (j, v) in m.problem.vars.iter().enumerate() {
        if v.kind == VarKind::Continuous {
            assert_eq!(v.cost, 0.0, "{}", m.problem.vars[j].name);
        }
    }
}

#[test]
fn capacity_row_shape() {
    let c = city(&paper(0.2, 0.5, 0.3));
    let m = build_alpp(&c);
    let row = m.problem.rows.iter().find(|r| r.name == "cap_SC0_CD").unwrap();
    assert_eq!(row.upper, 0.0);
    assert_eq!(row.lower, f64::NEG_INFINITY);
    let f = m.frequency_vars[arc_id(ArcKind::ToCenter, 0, 8)];
    for &(j, coef) in &row.terms {
        if j == f {
            assert_eq!(coef, -100.0);
        } else {
            assert_eq!(coef, 1.0);
            assert!(m.problem.vars[j].name.ends_with("_SC0_CD"));
        }
    }
    assert_eq!(row.terms.len(), 17);
}

#[test]
fn symmetric_model_constants() {
    let c = city(&paper(0.2, 0.5, 0.3));
    let m = build_alpp_sym(&c).unwrap();
    assert_eq!(m.problem.integer_vars().len(), 3);
    assert_eq!(m.peripheral_frequency, Some(24));
    let cost = |k: usize| m.problem.vars[m.frequency_vars[k]].cost;
    assert_relative_eq!(cost(SYM_CENTRAL), 480.0, max_relative = 1e-12);
    assert_relative_eq!(cost(SYM_CCW), 240.0 * ring(8), max_relative = 1e-12);
    assert_relative_eq!(cost(SYM_CW), 240.0 * ring(8), max_relative = 1e-12);
    assert_relative_eq!(m.problem.offset, 480.0 / 3.0 * 24.0, max_relative = 1e-12);
}

#[test]
fn symmetric_orbits_cover_every_arc_once() {
    let c = city(&CityParams { n: 6, ..paper(0.2, 0.5, 0.3) });
    let m = build_alpp_sym(&c).unwrap();
    let caps: Vec<_> = m.problem.rows.iter().filter(|r| r.name.starts_with("cap_")).collect();
    assert_eq!(caps.len(), 36);
    for a in &c.arcs {
        let rows: Vec<_> = caps
            .iter()
            .filter(|r| r.name == format!("cap_{}_{}", a.tail, a.head))
            .collect();
        assert_eq!(rows.len(), 1);
        let r = rows[0];
        let freq: Vec<usize> = r
            .terms
            .iter()
            .filter(|(j, _)| m.problem.vars[*j].kind == VarKind::Integer)
            .map(|(j, _)| *j)
            .collect();
        let expect = match a.kind {
            ArcKind::FromCenter | ArcKind::ToCenter => Some(m.frequency_vars[SYM_CENTRAL]),
            ArcKind::Ccw => Some(m.frequency_vars[SYM_CCW]),
            ArcKind::Cw => Some(m.frequency_vars[SYM_CW]),
            ArcKind::ToPeriphery | ArcKind::FromPeriphery => None,
        };
        match expect {
            Some(j) => assert_eq!(freq, vec![j]),
            None => {
                assert!(freq.is_empty());
                assert_relative_eq!(r.upper, 100.0 * m.peripheral_frequency.unwrap() as f64);
            }
        }
    }
}

#[test]
fn symmetric_model_rejects_small_cap() {
    let c = city(&CityParams { lambda: Some(10), ..paper(0.2, 0.5, 0.3) });
    assert_eq!(
        build_alpp_sym(&c).unwrap_err(),
        ModelError::PeripheralCapExceeded { required: 24, cap: 10 }
    );
}

#[test]
fn umcfp_prices() {
    let c = city(&CityParams { mu: 0.0, ..paper(0.2, 0.5, 0.3) });
    let u = build_umcfp(&c);
    for a in &c.arcs {
        assert_relative_eq!(u.costs[a.id], a.length, max_relative = 1e-12);
    }
    let c = city(&paper(0.2, 0.5, 0.3));
    let u = build_umcfp(&c);
    assert_relative_eq!(u.costs[arc_id(ArcKind::FromPeriphery, 2, 8)], 0.2, max_relative = 1e-12);
    assert_eq!(u.costs[arc_id(ArcKind::ToPeriphery, 2, 8)], 0.0);
    assert_eq!(u.costs[arc_id(ArcKind::FromCenter, 2, 8)], 0.0);
    assert_relative_eq!(u.costs[arc_id(ArcKind::ToCenter, 2, 8)], 0.6, max_relative = 1e-12);
    assert_relative_eq!(u.costs[arc_id(ArcKind::Ccw, 2, 8)], 0.3 * ring(8), max_relative = 1e-12);
    let half = city(&CityParams { mu: 0.5, k: 7.0, ..paper(0.2, 0.5, 0.3) });
    assert_relative_eq!(build_umcfp(&half).costs[arc_id(ArcKind::FromCenter, 0, 8)], 15.0);
}

#[test]
fn umcfp_lp_matches_path_sum() {
    for mu in [0.0, 0.4, 1.0] {
        let c = city(&CityParams { n: 5, mu, ..paper(0.3, 0.3, 0.4) });
        let u = build_umcfp(&c);
        let lp = solve_lp(&u.to_problem(&c)).unwrap();
        assert_relative_eq!(lp.objective, u.optimum(), max_relative = 1e-9);
    }
}

#[test]
fn relaxation_drops_integrality_only() {
    let m = build_alpp(&city(&paper(0.2, 0.5, 0.3)));
    let r = build_lp_relaxation(&m);
    assert!(r.is_relaxed() && !m.is_relaxed());
    assert_eq!(r.problem.num_rows(), m.problem.num_rows());
    for (a, b) in m.problem.vars.iter().zip(&r.problem.vars) {
        assert_eq!((a.lower, a.upper, a.cost), (b.lower, b.upper, b.cost));
    }
}

#[test]
fn zero_operator_weight_relaxation_is_the_flow_bound() {
    for (alpha, beta, gamma) in [(0.2, 0.5, 0.3), (0.6, 0.1, 0.3), (0.05, 0.05, 0.9)] {
        let c = city(&CityParams { mu: 0.0, ..paper(alpha, beta, gamma) });
        let lp = solve_lp(&build_lp_relaxation(&build_alpp(&c)).problem).unwrap();
        assert_relative_eq!(lp.objective, build_umcfp(&c).optimum(), max_relative = 1e-7);
    }
}

#[test]
fn small_cap_makes_relaxation_infeasible() {
    let c = city(&CityParams { lambda: Some(23), ..paper(0.2, 0.5, 0.3) });
    let lp = solve_lp(&build_lp_relaxation(&build_alpp(&c)).problem).unwrap();
    assert_eq!(lp.status, SolveStatus::Infeasible);
}

#[test]
fn strengthened_model_keeps_the_optimum() {
    let p = CityParams { n: 4, y: 600.0, k: 50.0, ..paper(0.3, 0.3, 0.4) };
    let c = city(&p);
    let opts = MilpOptions { gap_tol: 0.0, ..Default::default() };
    let plain = solve_milp(&build_alpp(&c).problem, &opts).unwrap();
    let strong = solve_milp(&build_alpp_with(&c, Strengthening::ALL).problem, &opts).unwrap();
    assert_relative_eq!(plain.objective, strong.objective, max_relative = 1e-9);
    let lp_plain = solve_lp(&build_alpp(&c).problem.relaxed()).unwrap();
    let lp_strong = solve_lp(&build_alpp_with(&c, Strengthening::ALL).problem.relaxed()).unwrap();
    assert!(lp_strong.objective >= lp_plain.objective - 1e-9);
}

#[test]
fn lp_file_lists_every_frequency_as_general() {
    let m = build_alpp(&city(&CityParams { n: 4, ..paper(0.2, 0.5, 0.3) }));
    let text = write_lp(&m.problem);
    let general = text.split("General\n").nth(1).unwrap();
    assert_eq!(general.split_whitespace().filter(|w| w.starts_with("F_")).count(), 24);
    assert!(text.contains(" cap_SC0_CD:"));
}

/// Three-integer model against enumeration of all frequency triples, each
/// paired with an LP routing solve.
#[test]
fn symmetric_model_matches_enumeration() {
    for (n, mu, shares) in [(4, 1.0, (0.2, 0.5, 0.3)), (5, 0.7, (0.1, 0.3, 0.6)), (4, 0.3, (0.6, 0.2, 0.2))] {
        let p = CityParams { n, mu, y: 400.0, k: 60.0, ..paper(shares.0, shares.1, shares.2) };
        let c = city(&p);
        let m = build_alpp_sym(&c).unwrap();
        let bb = solve_milp(&m.problem, &MilpOptions { gap_tol: 0.0, ..Default::default() }).unwrap();
        let mut best = f64::INFINITY;
        let cap = 6;
        for fc in 0..=cap {
            for fp in 0..=cap {
                for fm in 0..=cap {
                    let mut fixed = m.problem.relaxed();
                    for (k, f) in [(SYM_CENTRAL, fc), (SYM_CCW, fp), (SYM_CW, fm)] {
                        let j = m.frequency_vars[k];
                        fixed.vars[j].lower = f as f64;
                        fixed.vars[j].upper = f as f64;
                    }
                    let s = solve_lp(&fixed).unwrap();
                    if s.status == SolveStatus::Optimal {
                        best = best.min(s.objective);
                    }
                }
            }
        }
        assert!(bb.values[m.frequency_vars[SYM_CENTRAL]] <= cap as f64);
        assert_relative_eq!(bb.objective, best, max_relative = 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn objective_coefficients_are_nonnegative(p in arb_params(4..=9)) {
        let c = city(&p);
        let m = build_alpp(&c);
        prop_assert!(m.problem.vars.iter().all(|v| v.cost >= 0.0));
        if let Ok(s) = build_alpp_sym(&c) {
            prop_assert!(s.problem.vars.iter().all(|v| v.cost >= 0.0));
            prop_assert!(s.problem.offset >= 0.0);
        }
        prop_assert!(build_umcfp(&c).costs.iter().all(|&x| x >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn relaxation_dominates_flow_bound(p in arb_params(4..=6)) {
        let c = city(&p);
        let lp = solve_lp(&build_lp_relaxation(&build_alpp(&c)).problem).unwrap();
        prop_assert_eq!(&lp.status, &SolveStatus::Optimal);
        let flow = build_umcfp(&c).optimum();
        prop_assert!(lp.objective >= flow - 1e-7 * flow.abs().max(1.0), "{} < {}", lp.objective, flow);
    }
}
