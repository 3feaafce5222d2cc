//! Best-first branch-and-bound over bounded integer variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use log::debug;

use crate::error::SolverError;
use crate::problem::Problem;
use crate::scalar::Scalar;
use crate::simplex::{DualSimplex, LpOutcome};
use crate::solution::{SolveStats, SolveStatus, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branching {
    /// Most fractional integer variable, ties to the lowest index.
    #[default]
    MostFractional,
    /// Product score of per-variable average objective degradation.
    Pseudocost,
}

#[derive(Debug, Clone)]
pub struct MilpOptions<S> {
    pub gap_tol: S,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub branching: Branching,
}

impl<S: Scalar> Default for MilpOptions<S> {
    fn default() -> Self {
        Self {
            gap_tol: S::of(1e-4),
            node_limit: None,
            time_limit: None,
            branching: Branching::MostFractional,
        }
    }
}

/// Snapshot handed to a progress callback after every processed node.
#[derive(Debug, Clone, Copy)]
pub struct Progress<S> {
    pub nodes: usize,
    pub bound: S,
    pub incumbent: Option<S>,
    pub open: usize,
}

type Heuristic<'a, S> = Box<dyn FnMut(&[S]) -> Option<Vec<S>> + 'a>;
type ProgressFn<'a, S> = Box<dyn FnMut(Progress<S>) + 'a>;

struct Node<S> {
    bound: S,
    depth: usize,
    id: usize,
    lower: Vec<S>,
    upper: Vec<S>,
    /// LP values of the integer variables at this node.
    ints: Vec<S>,
}

impl<S: Scalar> PartialEq for Node<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Node<S> {}
impl<S: Scalar> PartialOrd for Node<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Node<S> {
    // BinaryHeap is a max-heap: the "greatest" node is the one with the
    // smallest bound, then the deepest, then the oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .to_f64_lossy()
            .total_cmp(&self.bound.to_f64_lossy())
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Incumbent<S> {
    objective: S,
    values: Vec<S>,
}

/// Branch-and-bound driver; build with [`BranchAndBound::new`] and call
/// [`BranchAndBound::solve`].
pub struct BranchAndBound<'a, S: Scalar> {
    problem: &'a Problem<S>,
    options: MilpOptions<S>,
    start: Option<Vec<S>>,
    heuristic: Option<Heuristic<'a, S>>,
    progress: Option<ProgressFn<'a, S>>,
}

struct Pseudocosts<S> {
    down_sum: Vec<S>,
    down_n: Vec<usize>,
    up_sum: Vec<S>,
    up_n: Vec<usize>,
}

impl<S: Scalar> Pseudocosts<S> {
    fn new(k: usize) -> Self {
        Self {
            down_sum: vec![S::zero(); k],
            down_n: vec![0; k],
            up_sum: vec![S::zero(); k],
            up_n: vec![0; k],
        }
    }

    fn record(&mut self, k: usize, up: bool, per_unit: S) {
        if up {
            self.up_sum[k] = self.up_sum[k] + per_unit;
            self.up_n[k] += 1;
        } else {
            self.down_sum[k] = self.down_sum[k] + per_unit;
            self.down_n[k] += 1;
        }
    }

    fn average(sum: &[S], count: &[usize]) -> S {
        let (s, c) = sum
            .iter()
            .zip(count)
            .filter(|(_, &c)| c > 0)
            .fold((S::zero(), 0usize), |(s, c), (&v, &n)| (s + v / S::of(n as f64), c + 1));
        if c == 0 {
            S::one()
        } else {
            s / S::of(c as f64)
        }
    }

    fn score(&self, k: usize, frac: S) -> S {
        let eps = S::of(1e-6);
        let down = if self.down_n[k] > 0 {
            self.down_sum[k] / S::of(self.down_n[k] as f64)
        } else {
            Self::average(&self.down_sum, &self.down_n)
        };
        let up = if self.up_n[k] > 0 {
            self.up_sum[k] / S::of(self.up_n[k] as f64)
        } else {
            Self::average(&self.up_sum, &self.up_n)
        };
        (frac * down).max(eps) * ((S::one() - frac) * up).max(eps)
    }
}

impl<'a, S: Scalar> BranchAndBound<'a, S> {
    pub fn new(problem: &'a Problem<S>) -> Self {
        Self {
            problem,
            options: MilpOptions::default(),
            start: None,
            heuristic: None,
            progress: None,
        }
    }

    pub fn options(mut self, options: MilpOptions<S>) -> Self {
        self.options = options;
        self
    }

    /// Known feasible point; only its integer components are used, the
    /// continuous part is re-optimised.
    pub fn start(mut self, values: Vec<S>) -> Self {
        self.start = Some(values);
        self
    }

    /// Called with the root LP solution; may propose a point whose integer
    /// components are tried as an incumbent.
    pub fn heuristic(mut self, f: impl FnMut(&[S]) -> Option<Vec<S>> + 'a) -> Self {
        self.heuristic = Some(Box::new(f));
        self
    }

    pub fn on_progress(mut self, f: impl FnMut(Progress<S>) + 'a) -> Self {
        self.progress = Some(Box::new(f));
        self
    }

    pub fn solve(mut self) -> Result<Solution<S>, SolverError> {
        self.problem.validate()?;
        let clock = Instant::now();
        let problem = self.problem;
        let ints = problem.integer_vars();
        let root_lo: Vec<S> = ints.iter().map(|&j| problem.vars[j].lower.ceil()).collect();
        let root_hi: Vec<S> = ints.iter().map(|&j| problem.vars[j].upper.floor()).collect();
        let mut lp = DualSimplex::new(problem);
        let mut stats = SolveStats::default();
        let itol = S::integrality_tol();
        let gap_tol = self.options.gap_tol;

        let mut incumbent: Option<Incumbent<S>> = None;
        let try_candidate = |lp: &mut DualSimplex<S>, cand: &[S], incumbent: &mut Option<Incumbent<S>>| {
            if let Some((obj, vals)) = polish(problem, lp, &ints, cand) {
                if incumbent.as_ref().is_none_or(|inc| obj < inc.objective) {
                    *incumbent = Some(Incumbent {
                        objective: obj,
                        values: vals,
                    });
                }
            }
        };

        if let Some(start) = self.start.take() {
            if start.len() == problem.num_vars() {
                try_candidate(&mut lp, &start, &mut incumbent);
            }
        }

        apply_bounds(&mut lp, &ints, &root_lo, &root_hi);
        let root = lp.solve();
        stats.nodes = 1;
        match root {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => {
                stats.lp_iterations = lp.iterations();
                stats.wall = clock.elapsed();
                return Ok(Solution::without_values(SolveStatus::Infeasible, stats));
            }
            LpOutcome::Unbounded => {
                stats.lp_iterations = lp.iterations();
                stats.wall = clock.elapsed();
                return Ok(Solution::without_values(SolveStatus::Unbounded, stats));
            }
            LpOutcome::IterationLimit => return Ok(lp_failure("root LP iteration limit", &lp, clock)),
            LpOutcome::Breakdown(msg) => return Ok(lp_failure(&msg, &lp, clock)),
        }
        let root_obj = lp.objective() + problem.offset;
        let root_x = lp.values();
        if let Some(h) = self.heuristic.as_mut() {
            if let Some(cand) = h(&root_x) {
                if cand.len() == problem.num_vars() {
                    try_candidate(&mut lp, &cand, &mut incumbent);
                }
            }
        }

        let mut heap = BinaryHeap::new();
        let mut next_id = 0usize;
        let root_ints: Vec<S> = ints.iter().map(|&j| root_x[j]).collect();
        if is_integral(&root_ints, itol) {
            try_candidate(&mut lp, &root_x, &mut incumbent);
        } else {
            heap.push(Node {
                bound: root_obj,
                depth: 0,
                id: next_id,
                lower: root_lo.clone(),
                upper: root_hi.clone(),
                ints: root_ints,
            });
            next_id += 1;
        }

        let mut best_bound = root_obj;
        let mut pseudo = Pseudocosts::new(ints.len());
        let mut status = SolveStatus::Optimal;
        let mut processed = 0usize;

        while let Some(top) = heap.peek() {
            let inc_obj = incumbent.as_ref().map(|i| i.objective);
            let frontier = inc_obj.map_or(top.bound, |v| v.min(top.bound));
            if frontier > best_bound {
                best_bound = frontier;
            }
            if let Some(v) = inc_obj {
                if (v - top.bound) <= gap_tol * v.abs().max(S::of(1e-12)) {
                    break;
                }
            }
            if self.options.node_limit.is_some_and(|l| processed >= l)
                || self.options.time_limit.is_some_and(|t| clock.elapsed() >= t)
            {
                status = SolveStatus::GapLimit;
                break;
            }
            let node = heap.pop().expect("peeked node");
            processed += 1;

            let k = choose_branch(&node.ints, itol, self.options.branching, &pseudo);
            let value = node.ints[k];
            let frac = value - value.floor();
            for up in [false, true] {
                let mut lower = node.lower.clone();
                let mut upper = node.upper.clone();
                if up {
                    lower[k] = value.ceil();
                } else {
                    upper[k] = value.floor();
                }
                if lower[k] > upper[k] {
                    continue;
                }
                apply_bounds(&mut lp, &ints, &lower, &upper);
                stats.nodes += 1;
                match lp.solve() {
                    LpOutcome::Optimal => {}
                    LpOutcome::Infeasible => continue,
                    LpOutcome::Unbounded => continue,
                    LpOutcome::IterationLimit => return Ok(lp_failure("LP iteration limit", &lp, clock)),
                    LpOutcome::Breakdown(msg) => return Ok(lp_failure(&msg, &lp, clock)),
                }
                let obj = lp.objective() + problem.offset;
                let dist = if up { S::one() - frac } else { frac };
                pseudo.record(k, up, (obj - node.bound).max(S::zero()) / dist.max(S::of(1e-9)));
                if let Some(inc) = incumbent.as_ref() {
                    if obj >= inc.objective - S::of(1e-9) * inc.objective.abs().max(S::one()) {
                        continue;
                    }
                }
                let x = lp.values();
                let child_ints: Vec<S> = ints.iter().map(|&j| x[j]).collect();
                if is_integral(&child_ints, itol) {
                    try_candidate(&mut lp, &x, &mut incumbent);
                    continue;
                }
                heap.push(Node {
                    bound: obj.max(node.bound),
                    depth: node.depth + 1,
                    id: next_id,
                    lower,
                    upper,
                    ints: child_ints,
                });
                next_id += 1;
            }
            if processed % 500 == 0 {
                debug!(
                    "nodes {} open {} bound {} incumbent {:?}",
                    processed,
                    heap.len(),
                    best_bound,
                    incumbent.as_ref().map(|i| i.objective)
                );
            }
            if let Some(cb) = self.progress.as_mut() {
                cb(Progress {
                    nodes: processed,
                    bound: best_bound,
                    incumbent: incumbent.as_ref().map(|i| i.objective),
                    open: heap.len(),
                });
            }
        }

        stats.lp_iterations = lp.iterations();
        stats.wall = clock.elapsed();
        let Some(inc) = incumbent else {
            if status == SolveStatus::GapLimit {
                return Ok(Solution::without_values(
                    SolveStatus::Error("resource limit reached without a feasible solution".into()),
                    stats,
                ));
            }
            return Ok(Solution::without_values(SolveStatus::Infeasible, stats));
        };
        let open_bound = heap.peek().map_or(inc.objective, |n| n.bound.min(inc.objective));
        let bound = best_bound.max(open_bound).min(inc.objective);
        let gap = (inc.objective - bound).max(S::zero()) / inc.objective.abs().max(S::of(1e-12));
        Ok(Solution {
            status,
            objective: inc.objective,
            values: inc.values,
            bound,
            gap,
            stats,
        })
    }
}

fn lp_failure<S: Scalar>(msg: &str, lp: &DualSimplex<S>, clock: Instant) -> Solution<S> {
    Solution::without_values(
        SolveStatus::Error(msg.to_string()),
        SolveStats {
            nodes: 0,
            lp_iterations: lp.iterations(),
            wall: clock.elapsed(),
        },
    )
}

fn apply_bounds<S: Scalar>(lp: &mut DualSimplex<S>, ints: &[usize], lower: &[S], upper: &[S]) {
    for (k, &j) in ints.iter().enumerate() {
        lp.set_bounds(j, lower[k], upper[k]);
    }
}

fn is_integral<S: Scalar>(values: &[S], tol: S) -> bool {
    values.iter().all(|&v| (v - v.round()).abs() <= tol)
}

fn choose_branch<S: Scalar>(values: &[S], tol: S, rule: Branching, pseudo: &Pseudocosts<S>) -> usize {
    let mut best = usize::MAX;
    let mut best_score = S::neg_infinity();
    for (k, &v) in values.iter().enumerate() {
        let f = v - v.floor();
        let dist = f.min(S::one() - f);
        if dist <= tol {
            continue;
        }
        let score = match rule {
            Branching::MostFractional => dist,
            Branching::Pseudocost => pseudo.score(k, f),
        };
        if score > best_score {
            best_score = score;
            best = k;
        }
    }
    best
}

/// Fixes the integer part of `cand` (rounded) and re-solves the LP for the
/// continuous part. Leaves integer bounds fixed; callers reapply node bounds.
fn polish<S: Scalar>(problem: &Problem<S>, lp: &mut DualSimplex<S>, ints: &[usize], cand: &[S]) -> Option<(S, Vec<S>)> {
    let saved: Vec<(S, S)> = ints.iter().map(|&j| lp.bounds(j)).collect();
    let mut fixable = true;
    for &j in ints {
        let v = cand[j].round();
        if v < problem.vars[j].lower || v > problem.vars[j].upper {
            fixable = false;
            break;
        }
    }
    let result = if fixable {
        for &j in ints {
            let v = cand[j].round();
            lp.set_bounds(j, v, v);
        }
        match lp.solve() {
            LpOutcome::Optimal => {
                let vals = lp.values();
                (problem.max_violation(&vals) <= S::feasibility_tol())
                    .then(|| (problem.objective(&vals), vals))
            }
            _ => None,
        }
    } else {
        None
    };
    for (k, &j) in ints.iter().enumerate() {
        lp.set_bounds(j, saved[k].0, saved[k].1);
    }
    result
}

/// Solves the LP relaxation (integrality ignored).
pub fn solve_lp<S: Scalar>(problem: &Problem<S>) -> Result<Solution<S>, SolverError> {
    problem.validate()?;
    let clock = Instant::now();
    let mut lp = DualSimplex::new(problem);
    let outcome = lp.solve();
    let stats = SolveStats {
        nodes: 0,
        lp_iterations: lp.iterations(),
        wall: clock.elapsed(),
    };
    let status = match outcome {
        LpOutcome::Optimal => {
            let values = lp.values();
            let objective = problem.objective(&values);
            return Ok(Solution {
                status: SolveStatus::Optimal,
                objective,
                bound: objective,
                gap: S::zero(),
                values,
                stats,
            });
        }
        LpOutcome::Infeasible => SolveStatus::Infeasible,
        LpOutcome::Unbounded => SolveStatus::Unbounded,
        LpOutcome::IterationLimit => SolveStatus::Error("LP iteration limit".into()),
        LpOutcome::Breakdown(msg) => SolveStatus::Error(msg),
    };
    Ok(Solution::without_values(status, stats))
}

pub fn solve_milp<S: Scalar>(problem: &Problem<S>, options: &MilpOptions<S>) -> Result<Solution<S>, SolverError> {
    BranchAndBound::new(problem).options(options.clone()).solve()
}
