mod common;

use approx::assert_relative_eq;
use common::{city, extreme, options, paper, rel};
use paracity::bounds::kappa;
use paracity::city::{arc_endpoints, arc_id, ArcKind, CityParams, Node};
use paracity::lines::{
    canonical_symmetric_lineplan, decompose_circulation, lpa, lpa_on, plan_length_profile, Line, LineError,
    LinePlan, LpaOutcome,
};
use paracity::solve::solve_pair;
use paracity::symmetry::{FrequencyPlan, SymmetricFrequencies};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn assert_round_trip(plan: &FrequencyPlan, lines: &LinePlan<f64>) {
    assert_eq!(&lines.aggregate(), plan);
    assert_eq!(lines.length_profile(), plan_length_profile(plan));
    assert!(lines.entries.iter().all(|(_, f)| *f > 0));
    for (line, _) in &lines.entries {
        let mut seen = line.nodes.clone();
        seen.sort_by_key(|v| v.id(plan.n));
        seen.dedup();
        assert_eq!(seen.len(), line.nodes.len(), "line repeats a node");
    }
}

fn ring_plan(n: usize) -> FrequencyPlan {
    // peripheral pendulums plus one ring SC0 -> SC1 -> ... -> SC_{n-1} -> CD -> SC0
    let mut plan = FrequencyPlan::zero(n);
    for z in 0..n {
        plan.frequencies[arc_id(ArcKind::ToPeriphery, z, n)] = 1;
        plan.frequencies[arc_id(ArcKind::FromPeriphery, z, n)] = 1;
    }
    for z in 0..n - 1 {
        plan.frequencies[arc_id(ArcKind::Ccw, z, n)] = 1;
    }
    plan.frequencies[arc_id(ArcKind::ToCenter, n - 1, n)] = 1;
    plan.frequencies[arc_id(ArcKind::FromCenter, 0, n)] = 1;
    plan
}

#[test]
fn zero_plan_has_no_lines() {
    let c = city(&paper(0.2, 0.5, 0.3));
    assert!(decompose_circulation(&FrequencyPlan::zero(8), &c).unwrap().is_empty());
}

#[test]
fn unit_pendulums_round_trip() {
    let c = city(&CityParams { n: 4, ..paper(0.2, 0.5, 0.3) });
    let plan = SymmetricFrequencies { peripheral: 1, central: 1, ccw: 0, cw: 0 }.expand(4);
    let lines = decompose_circulation(&plan, &c).unwrap();
    assert_round_trip(&plan, &lines);
    assert_eq!(lines.len(), 8);
    assert_relative_eq!(lines.total_length(), plan.line_length(&c), max_relative = 1e-12);
}

#[test]
fn single_ring_plan_round_trip() {
    let n = 8;
    let c = city(&extreme(n));
    let plan = ring_plan(n);
    let lines = decompose_circulation(&plan, &c).unwrap();
    assert_round_trip(&plan, &lines);
    assert_eq!(lines.len(), n + 1);
    let big = lines.entries.iter().find(|(l, _)| l.nodes.len() == n + 1).unwrap();
    assert_eq!(big.1, 1);
    assert!(big.0.nodes.contains(&Node::CD));
}

#[test]
fn decomposition_rejects_non_circulation() {
    let c = city(&paper(0.2, 0.5, 0.3));
    let mut plan = FrequencyPlan::zero(8);
    plan.frequencies[arc_id(ArcKind::Ccw, 0, 8)] = 2;
    assert!(matches!(decompose_circulation(&plan, &c), Err(LineError::NotCirculation(_))));
}

#[test]
fn decomposition_is_deterministic() {
    let c = city(&paper(0.2, 0.5, 0.3));
    let plan = random_circulation(8, &mut StdRng::seed_from_u64(7));
    let a = decompose_circulation(&plan, &c).unwrap();
    let b = decompose_circulation(&plan, &c).unwrap();
    assert_eq!(a, b);
}

#[test]
fn line_validation() {
    let c = city(&CityParams { n: 4, ..paper(0.2, 0.5, 0.3) });
    assert_eq!(Line::new(vec![Node::CD], &c).unwrap_err(), LineError::TooShort);
    assert_eq!(
        Line::new(vec![Node::p(0), Node::CD], &c).unwrap_err(),
        LineError::NotAdjacent(Node::p(0), Node::CD)
    );
    assert_eq!(
        Line::new(vec![Node::sc(0), Node::CD, Node::sc(0)], &c).unwrap_err(),
        LineError::RepeatedNode(Node::sc(0))
    );
    let l = Line::new(vec![Node::sc(0), Node::sc(1), Node::CD], &c).unwrap();
    assert_relative_eq!(l.length, 30.0 * (2.0 + common::ring(4)), max_relative = 1e-12);
    assert_eq!(l.normalized(4), vec![0, 1, 2]);
}

#[test]
fn canonical_plan_counts() {
    let c = city(&paper(0.2, 0.5, 0.3));
    let sf = SymmetricFrequencies { peripheral: 24, central: 7, ccw: 0, cw: 0 };
    let plan = canonical_symmetric_lineplan(&sf, &c);
    assert_eq!(plan.len(), 16);
    assert_eq!(plan.entries.iter().filter(|(_, f)| *f == 24).count(), 8);
    assert_eq!(plan.entries.iter().filter(|(_, f)| *f == 7).count(), 8);
    assert!(plan.entries.iter().all(|(l, _)| l.nodes.len() == 2));
    assert_eq!(plan.aggregate(), sf.expand(8));

    let only = SymmetricFrequencies { peripheral: 3, central: 0, ccw: 0, cw: 0 };
    assert_eq!(canonical_symmetric_lineplan(&only, &c).len(), 8);
}

#[test]
fn canonical_plan_is_rotation_invariant() {
    for n in [4, 5, 8] {
        let c = city(&CityParams { n, ..paper(0.2, 0.5, 0.3) });
        let sf = SymmetricFrequencies { peripheral: 5, central: 2, ccw: 3, cw: 1 };
        let plan = canonical_symmetric_lineplan(&sf, &c);
        assert_eq!(plan.len(), 2 * n + 2);
        assert_eq!(plan.aggregate(), sf.expand(n));
        let base = plan.canonical_multiset();
        for z in 0..n {
            assert_eq!(plan.rotate(z).canonical_multiset(), base, "n={n} z={z}");
        }
    }
}

#[test]
fn line_plan_json_fields() {
    let c = city(&CityParams { n: 4, ..paper(0.2, 0.5, 0.3) });
    let sf = SymmetricFrequencies { peripheral: 2, central: 0, ccw: 1, cw: 0 };
    let json = serde_json::to_value(canonical_symmetric_lineplan(&sf, &c)).unwrap();
    let first = &json[0];
    assert_eq!(first["nodes"], serde_json::json!(["P0", "SC0"]));
    assert_eq!(first["frequency"], 2);
    assert_relative_eq!(first["length"].as_f64().unwrap(), 20.0, max_relative = 1e-12);
    assert_eq!(json[4]["nodes"], serde_json::json!(["SC0", "SC1", "SC2", "SC3"]));
}

#[test]
fn lpa_on_extreme_instance() {
    let n = 8;
    let c = city(&extreme(n));
    let LpaOutcome::Solved(r) = lpa_on(&c, &options()).unwrap() else {
        panic!("infeasible")
    };
    assert_relative_eq!(r.cost, 18.0 * 30.0, max_relative = 1e-6);
    let pair = solve_pair(&c, &options()).unwrap();
    let ratio = r.cost / pair.report.opt_alpp;
    let r8 = common::ring(8);
    assert_relative_eq!(ratio, 18.0 / (4.0 + 7.0 * r8), max_relative = 1e-6);
    assert!(ratio <= kappa(1.0 / 8.0));
    assert!((kappa(1.0f64 / 8.0) - 20.31).abs() < 0.01);
    assert_eq!(r.plan.aggregate(), r.frequencies.expand(n));
}

#[test]
fn lpa_is_optimal_without_operator_weight() {
    let p = CityParams { mu: 0.0, n: 6, ..paper(0.3, 0.4, 0.3) };
    let c = city(&p);
    let LpaOutcome::Solved(r) = lpa(&p, &options()).unwrap() else {
        panic!("infeasible")
    };
    let pair = solve_pair(&c, &options()).unwrap();
    assert!(rel(r.cost, pair.report.opt_alpp) <= 1e-6);
}

#[test]
fn lpa_reports_infeasible_below_peripheral_frequency() {
    let p = CityParams { lambda: Some(23), ..paper(0.2, 0.5, 0.3) };
    assert!(matches!(lpa(&p, &options()).unwrap(), LpaOutcome::Infeasible));
}

/// The LPA ratio against a known feasible plan bounds the ratio against the
/// optimum from below.
#[test]
fn worst_case_family_grows_with_n() {
    for n in [4, 8] {
        let c = city(&extreme(n));
        let LpaOutcome::Solved(r) = lpa_on(&c, &options()).unwrap() else {
            panic!("infeasible")
        };
        let feasible = ring_plan(n).operator_cost(&c);
        let floor = (1.0 + n as f64) / (2.0 + std::f64::consts::PI);
        assert!(r.cost / feasible >= floor, "n={n}: {} < {floor}", r.cost / feasible);
    }
}

fn random_circulation(n: usize, rng: &mut StdRng) -> FrequencyPlan {
    let mut plan = FrequencyPlan::zero(n);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); 2 * n + 1];
    for a in 0..6 * n {
        let (t, _) = arc_endpoints(ArcKind::ALL[a % 6], a / 6, n);
        out[t.id(n)].push(a);
    }
    for _ in 0..rng.gen_range(1..12) {
        // random walk until a node repeats, keep the closed cycle
        let mut at = rng.gen_range(0..2 * n + 1);
        let mut nodes = vec![at];
        let mut arcs: Vec<usize> = Vec::new();
        loop {
            let a = out[at][rng.gen_range(0..out[at].len())];
            at = arc_endpoints(ArcKind::ALL[a % 6], a / 6, n).1.id(n);
            arcs.push(a);
            if let Some(pos) = nodes.iter().position(|&v| v == at) {
                let f = rng.gen_range(1..20);
                for &a in &arcs[pos..] {
                    plan.frequencies[a] += f;
                }
                break;
            }
            nodes.push(at);
        }
    }
    plan
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_circulations_round_trip(n in 4usize..=10, seed in any::<u64>()) {
        let c = city(&CityParams { n, ..paper(0.2, 0.5, 0.3) });
        let plan = random_circulation(n, &mut StdRng::seed_from_u64(seed));
        prop_assert_eq!(plan.conservation_violation(), None);
        let lines = decompose_circulation(&plan, &c).unwrap();
        assert_round_trip(&plan, &lines);
        prop_assert!(rel(lines.total_length(), plan.line_length(&c)) <= 1e-12);
    }
}
