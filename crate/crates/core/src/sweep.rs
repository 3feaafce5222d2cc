//! Grid sweeps over the demand shares `(alpha, gamma)`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::bounds::gap_bounds;
use crate::city::{build_city, CityParams};
use crate::solve::{solve_pair, SolveOptions};
use crate::symmetry::Classification;

/// Share grid `start, start + step, ...` up to `stop` for both `alpha` and
/// `gamma`; points are kept when `beta = 1 - alpha - gamma` is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Points with `beta` at or below this are dropped.
    pub min_beta: f64,
}

impl Grid {
    pub fn new(step: f64) -> Self {
        Self {
            start: 0.025,
            stop: 0.95,
            step,
            min_beta: 0.0,
        }
    }

    /// Multiples of `step` strictly inside the unit interval.
    pub fn interior(step: f64) -> Self {
        Self {
            start: step,
            stop: 1.0 - step,
            step,
            min_beta: 0.0,
        }
    }

    fn axis(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| round12(self.start + i as f64 * self.step)).collect()
    }

    /// `(alpha, beta, gamma)` triples, `alpha` outer and `gamma` inner,
    /// both ascending.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let axis = self.axis();
        let mut out = Vec::new();
        for &alpha in &axis {
            for &gamma in &axis {
                let beta = round12(1.0 - alpha - gamma);
                if beta > self.min_beta && beta < 1.0 {
                    out.push((alpha, beta, gamma));
                }
            }
        }
        out
    }
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Maps `f` over `items` on `jobs` threads; results keep the input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every slot is filled"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub opt_alpp: f64,
    pub opt_alpps: f64,
    pub gamma_abs: f64,
    pub gamma_rel: f64,
    /// `symmetric`, `asymmetric`, `infeasible` or `error: ...`.
    pub classification: String,
    pub bound_cn_ag: f64,
    pub ms_alpp: f64,
    pub ms_alpps: f64,
}

impl SweepRow {
    pub fn is_asymmetric(&self) -> bool {
        self.classification == Classification::Asymmetric.as_str()
    }

    pub fn is_error(&self) -> bool {
        self.classification.starts_with("error")
    }
}

pub fn sweep_row(base: &CityParams<f64>, point: (f64, f64, f64), options: &SolveOptions<f64>) -> SweepRow {
    let (alpha, beta, gamma) = point;
    let params = base.with_shares(alpha, beta, gamma);
    let mut row = SweepRow {
        alpha,
        beta,
        gamma,
        opt_alpp: f64::NAN,
        opt_alpps: f64::NAN,
        gamma_abs: f64::NAN,
        gamma_rel: f64::NAN,
        classification: String::new(),
        bound_cn_ag: f64::NAN,
        ms_alpp: 0.0,
        ms_alpps: 0.0,
    };
    let outcome = build_city(&params)
        .map_err(|e| e.to_string())
        .and_then(|city| {
            let bounds = gap_bounds(&params).map_err(|e| e.to_string())?;
            let pair = solve_pair(&city, options).map_err(|e| e.to_string())?;
            Ok((bounds, pair))
        });
    match outcome {
        Ok((bounds, pair)) => {
            row.opt_alpp = pair.report.opt_alpp;
            row.opt_alpps = pair.report.opt_alpps;
            row.gamma_abs = pair.report.gamma_abs;
            row.gamma_rel = pair.report.gamma_rel;
            row.classification = pair.report.classification.as_str().to_string();
            row.bound_cn_ag = bounds.c_n_ag;
            row.ms_alpp = pair.alpp.wall().as_secs_f64() * 1e3;
            row.ms_alpps = pair.sym.wall().as_secs_f64() * 1e3;
        }
        Err(msg) => {
            log::warn!("alpha={alpha} gamma={gamma}: {msg}");
            row.classification = format!("error: {msg}");
        }
    }
    row
}

pub fn run_sweep(base: &CityParams<f64>, grid: &Grid, options: &SolveOptions<f64>, jobs: usize) -> Vec<SweepRow> {
    let points = grid.points();
    parallel_map(&points, jobs, |&p| sweep_row(base, p, options))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub asymmetric: usize,
    pub infeasible: usize,
    pub errors: usize,
    pub asymmetric_share: f64,
    pub max_gamma_rel: f64,
}

pub fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let asymmetric = rows.iter().filter(|r| r.is_asymmetric()).count();
    let infeasible = rows
        .iter()
        .filter(|r| r.classification == Classification::Infeasible.as_str())
        .count();
    let errors = rows.iter().filter(|r| r.is_error()).count();
    let max_gamma_rel = rows
        .iter()
        .filter(|r| r.gamma_rel.is_finite())
        .map(|r| r.gamma_rel)
        .fold(0.0, f64::max);
    SweepSummary {
        rows: rows.len(),
        asymmetric,
        infeasible,
        errors,
        asymmetric_share: if rows.is_empty() { 0.0 } else { asymmetric as f64 / rows.len() as f64 },
        max_gamma_rel,
    }
}
