use paracity_solver::{write_lp, Problem, VarKind};

#[test]
fn renders_all_sections() {
    let mut p = Problem::new();
    let x = p.add_var("x", 0.0, 4.0, -3.0, VarKind::Integer);
    let y = p.add_var("y", 0.0, f64::INFINITY, -5.0, VarKind::Continuous);
    let z = p.add_var("z", f64::NEG_INFINITY, f64::INFINITY, 0.0, VarKind::Continuous);
    p.add_row("c", vec![(x, 3.0), (y, 2.0)], f64::NEG_INFINITY, 18.0);
    p.add_row("e", vec![(y, 1.0), (z, -1.0)], 1.0, 1.0);
    p.add_row("r", vec![(x, 1.0), (z, 1.0)], -2.0, 2.0);
    p.offset = 7.5;
    let text = write_lp(&p);
    let expected = "\
Minimize
 obj: - 3 x - 5 y + 7.5
Subject To
 c: 3 x + 2 y <= 18
 e: 1 y - 1 z = 1
 r_lo: 1 x + 1 z >= -2
 r_hi: 1 x + 1 z <= 2
Bounds
 0 <= x <= 4
 z free
General
 x
End
";
    assert_eq!(text, expected);
}

#[test]
fn long_rows_wrap() {
    let mut p = Problem::new();
    let vars: Vec<usize> = (0..14)
        .map(|i| p.add_var(format!("v{i}"), 0.0, 1.0, 1.0, VarKind::Continuous))
        .collect();
    p.add_row("all", vars.iter().map(|&j| (j, 1.0)).collect(), 1.0, f64::INFINITY);
    let text = write_lp(&p);
    let row_lines: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with(" all:"))
        .take_while(|l| !l.starts_with("Bounds"))
        .collect();
    assert_eq!(row_lines.len(), 3);
    assert!(row_lines[2].trim_end().ends_with(">= 1"));
}

#[test]
fn empty_objective_is_zero() {
    let mut p: Problem<f64> = Problem::new();
    p.add_var("x", 0.0, 1.0, 0.0, VarKind::Continuous);
    assert!(write_lp(&p).starts_with("Minimize\n obj: 0\n"));
}
