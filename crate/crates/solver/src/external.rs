//! Hands a problem to an outside solver through files.
//!
//! The command template comes from `PARACITY_SOLVER_CMD`; `{lp}` is replaced
//! by the path of the written LP file and `{sol}` by the path the solver must
//! write its answer to. The answer holds one `name value` pair per line.
//! Unlisted variables read as zero. A line `status infeasible` (or
//! `unbounded`) reports that outcome instead of values.

use std::collections::HashMap;
use std::process::Command;
use std::time::Instant;

use crate::error::SolverError;
use crate::lpformat::write_lp;
use crate::problem::Problem;
use crate::scalar::Scalar;
use crate::solution::{SolveStats, SolveStatus, Solution};

pub const SOLVER_CMD_ENV: &str = "PARACITY_SOLVER_CMD";

#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub command: String,
}

impl ExternalSolver {
    pub fn from_env() -> Option<Self> {
        std::env::var(SOLVER_CMD_ENV)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .map(|command| Self { command })
    }

    pub fn solve<S: Scalar>(&self, problem: &Problem<S>) -> Result<Solution<S>, SolverError> {
        problem.validate()?;
        let clock = Instant::now();
        let dir = tempfile::Builder::new().prefix("paracity-").tempdir()?;
        let lp_path = dir.path().join("model.lp");
        let sol_path = dir.path().join("model.sol");
        std::fs::write(&lp_path, write_lp(problem))?;
        let cmd = self
            .command
            .replace("{lp}", &lp_path.to_string_lossy())
            .replace("{sol}", &sol_path.to_string_lossy());
        let output = Command::new("sh").arg("-c").arg(&cmd).output()?;
        let result = if output.status.success() {
            std::fs::read_to_string(&sol_path)
                .map_err(SolverError::from)
                .and_then(|text| parse_solution(problem, &text))
        } else {
            Err(SolverError::Backend(format!(
                "command exited with {}: {}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )))
        };
        let mut sol = result?;
        sol.stats.wall = clock.elapsed();
        Ok(sol)
    }
}

/// Parses a `name value` solution file against the variables of `problem`.
pub fn parse_solution<S: Scalar>(problem: &Problem<S>, text: &str) -> Result<Solution<S>, SolverError> {
    let index: HashMap<&str, usize> = problem
        .vars
        .iter()
        .enumerate()
        .map(|(j, v)| (v.name.as_str(), j))
        .collect();
    let mut values = vec![S::zero(); problem.num_vars()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(SolverError::Backend(format!("line {}: expected `name value`", lineno + 1)));
        };
        if name == "status" {
            let status = match value.to_ascii_lowercase().as_str() {
                "infeasible" => SolveStatus::Infeasible,
                "unbounded" => SolveStatus::Unbounded,
                "optimal" => continue,
                other => SolveStatus::Error(format!("external status {other}")),
            };
            return Ok(Solution::without_values(status, SolveStats::default()));
        }
        let j = *index
            .get(name)
            .ok_or_else(|| SolverError::Backend(format!("line {}: unknown variable {name}", lineno + 1)))?;
        let v: f64 = value
            .parse()
            .map_err(|_| SolverError::Backend(format!("line {}: bad number {value}", lineno + 1)))?;
        values[j] = S::of(v);
    }
    let objective = problem.objective(&values);
    Ok(Solution {
        status: SolveStatus::Optimal,
        objective,
        values,
        bound: objective,
        gap: S::zero(),
        stats: SolveStats::default(),
    })
}
