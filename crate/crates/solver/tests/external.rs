use std::path::Path;

use paracity_solver::external::parse_solution;
use paracity_solver::{solve_milp, ExternalSolver, MilpOptions, Problem, SolveStatus, VarKind};

fn small() -> Problem<f64> {
    let mut p = Problem::new();
    let x = p.add_var("x", 0.0, 4.0, -3.0, VarKind::Integer);
    let y = p.add_var("y", 0.0, f64::INFINITY, -5.0, VarKind::Continuous);
    p.add_row("b", vec![(y, 2.0)], f64::NEG_INFINITY, 12.0);
    p.add_row("c", vec![(x, 3.0), (y, 2.0)], f64::NEG_INFINITY, 18.0);
    p
}

#[test]
fn parses_values_and_comments() {
    let s = parse_solution(&small(), "# answer\nx 2\n\ny 6.0\n").unwrap();
    assert_eq!(s.status, SolveStatus::Optimal);
    assert_eq!(s.values, vec![2.0, 6.0]);
    assert_eq!(s.objective, -36.0);
}

#[test]
fn missing_variables_read_as_zero() {
    let s = parse_solution(&small(), "y 1\n").unwrap();
    assert_eq!(s.values, vec![0.0, 1.0]);
}

#[test]
fn reports_status_lines() {
    let s = parse_solution(&small(), "status infeasible\n").unwrap();
    assert_eq!(s.status, SolveStatus::Infeasible);
    assert!(s.values.is_empty());
    let s = parse_solution(&small(), "status unbounded\n").unwrap();
    assert_eq!(s.status, SolveStatus::Unbounded);
}

#[test]
fn rejects_unknown_names_and_bad_numbers() {
    assert!(parse_solution(&small(), "w 1\n").is_err());
    assert!(parse_solution(&small(), "x one\n").is_err());
    assert!(parse_solution(&small(), "x 1 2\n").is_err());
}

#[test]
fn runs_a_shell_command() {
    let solver = ExternalSolver {
        command: "test -s {lp} && printf 'x 2\\ny 6\\n' > {sol}".into(),
    };
    let s = solver.solve(&small()).unwrap();
    assert_eq!(s.objective, -36.0);
}

#[test]
fn failing_command_is_an_error() {
    let solver = ExternalSolver {
        command: "echo broken >&2; exit 3".into(),
    };
    let err = solver.solve(&small()).unwrap_err().to_string();
    assert!(err.contains("broken"), "{err}");
}

#[test]
fn agrees_with_highs_when_available() {
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_backend.py");
    let probe = std::process::Command::new("python3").args(["-c", "import highspy"]).output();
    if !matches!(probe, Ok(ref o) if o.status.success()) {
        eprintln!("highspy not installed; skipping");
        return;
    }
    let solver = ExternalSolver {
        command: format!("python3 {} {{lp}} {{sol}}", script.display()),
    };
    let p = small();
    let ext = solver.solve(&p).unwrap();
    let own = solve_milp(&p, &MilpOptions::default()).unwrap();
    assert!((ext.objective - own.objective).abs() < 1e-9);
}
