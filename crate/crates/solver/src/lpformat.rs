//! CPLEX LP-format writer.

use std::fmt::Write as _;

use crate::problem::{Problem, VarKind};
use crate::scalar::Scalar;

const TERMS_PER_LINE: usize = 6;

fn push_terms<S: Scalar>(out: &mut String, terms: impl IntoIterator<Item = (S, String)>) {
    let mut count = 0;
    for (c, name) in terms {
        if c == S::zero() {
            continue;
        }
        if count > 0 && count % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let v = c.to_f64_lossy();
        if count == 0 {
            if v < 0.0 {
                let _ = write!(out, " - {} {}", -v, name);
            } else {
                let _ = write!(out, " {} {}", v, name);
            }
        } else if v < 0.0 {
            let _ = write!(out, " - {} {}", -v, name);
        } else {
            let _ = write!(out, " + {} {}", v, name);
        }
        count += 1;
    }
    if count == 0 {
        out.push_str(" 0");
    }
}

/// Renders `problem` in LP format. Ranged rows become a `_lo`/`_hi` pair
/// and the objective offset is written as a constant term.
pub fn write_lp<S: Scalar>(problem: &Problem<S>) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let terms = problem
        .vars
        .iter()
        .map(|v| (v.cost, v.name.clone()))
        .collect::<Vec<_>>();
    push_terms(&mut out, terms);
    if problem.offset != S::zero() {
        let off = problem.offset.to_f64_lossy();
        if off < 0.0 {
            let _ = write!(out, " - {}", -off);
        } else {
            let _ = write!(out, " + {}", off);
        }
    }
    out.push_str("\nSubject To\n");
    for r in &problem.rows {
        let body = r
            .terms
            .iter()
            .map(|&(j, c)| (c, problem.vars[j].name.clone()))
            .collect::<Vec<_>>();
        let lo = r.lower.to_f64_lossy();
        let hi = r.upper.to_f64_lossy();
        let mut emit = |name: &str, sense: &str, rhs: f64| {
            let _ = write!(out, " {}:", name);
            push_terms(&mut out, body.clone());
            let _ = writeln!(out, " {} {}", sense, rhs);
        };
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) if lo == hi => emit(&r.name, "=", lo),
            (true, true) => {
                emit(&format!("{}_lo", r.name), ">=", lo);
                emit(&format!("{}_hi", r.name), "<=", hi);
            }
            (true, false) => emit(&r.name, ">=", lo),
            (false, true) => emit(&r.name, "<=", hi),
            (false, false) => {}
        }
    }
    out.push_str("Bounds\n");
    for v in &problem.vars {
        let lo = v.lower.to_f64_lossy();
        let hi = v.upper.to_f64_lossy();
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", lo, v.name, hi);
            }
            (true, false) => {
                if lo != 0.0 {
                    let _ = writeln!(out, " {} >= {}", v.name, lo);
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", v.name, hi);
            }
            (false, false) => {
                let _ = writeln!(out, " {} free", v.name);
            }
        }
    }
    let ints: Vec<&str> = problem
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Integer)
        .map(|v| v.name.as_str())
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for chunk in ints.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
