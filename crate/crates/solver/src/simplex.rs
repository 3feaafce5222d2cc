//! Bounded dual simplex on an explicit dense basis inverse.
//!
//! Rows are written as `A x - s = 0` with one logical `s_i` per row carrying
//! the row bounds, so the all-logical basis is always available as a start.
//! Dual steepest-edge weights are exact row norms of the inverse, which the
//! product-form update touches anyway. Bound changes keep the basis dual
//! feasible, which is what branch-and-bound relies on for warm starts.

use crate::problem::Problem;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable sitting at zero.
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    Breakdown(String),
}

const REINVERT_EVERY: usize = 120;
const DEGENERATE_BEFORE_BLAND: usize = 60;

pub struct DualSimplex<S> {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<S>,
    cost: Vec<S>,
    shifted: Vec<S>,
    lo: Vec<S>,
    hi: Vec<S>,
    status: Vec<Status>,
    basis: Vec<usize>,
    x: Vec<S>,
    d: Vec<S>,
    binv: Vec<S>,
    weight: Vec<S>,
    alpha: Vec<S>,
    column: Vec<S>,
    pivot_row: Vec<S>,
    pivot_nz: Vec<usize>,
    artificial_lo: Vec<bool>,
    artificial_hi: Vec<bool>,
    since_inversion: usize,
    primal_stale: bool,
    iterations: usize,
    unshifting: bool,
    big: S,
}

impl<S: Scalar> DualSimplex<S> {
    pub fn new(problem: &Problem<S>) -> Self {
        let n = problem.num_vars();
        let m = problem.num_rows();
        let mut counts = vec![0usize; n + 1];
        for r in &problem.rows {
            for &(j, _) in &r.terms {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![S::zero(); nnz];
        for (i, r) in problem.rows.iter().enumerate() {
            for &(j, c) in &r.terms {
                if c != S::zero() {
                    col_row[fill[j]] = i;
                    col_val[fill[j]] = c;
                    fill[j] += 1;
                }
            }
        }
        // Duplicate or zero entries leave gaps; compact them out.
        let mut start = vec![0usize; n + 1];
        let mut rows_c = Vec::with_capacity(nnz);
        let mut vals_c = Vec::with_capacity(nnz);
        for j in 0..n {
            let mut entries: Vec<(usize, S)> = (col_start[j]..fill[j])
                .map(|k| (col_row[k], col_val[k]))
                .collect();
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, S)> = Vec::with_capacity(entries.len());
            for (i, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == i => last.1 = last.1 + v,
                    _ => merged.push((i, v)),
                }
            }
            for (i, v) in merged {
                if v != S::zero() {
                    rows_c.push(i);
                    vals_c.push(v);
                }
            }
            start[j + 1] = rows_c.len();
        }

        let mut cost = vec![S::zero(); n + m];
        let mut lo = vec![S::zero(); n + m];
        let mut hi = vec![S::zero(); n + m];
        for (j, v) in problem.vars.iter().enumerate() {
            cost[j] = v.cost;
            lo[j] = v.lower;
            hi[j] = v.upper;
        }
        for (i, r) in problem.rows.iter().enumerate() {
            lo[n + i] = r.lower;
            hi[n + i] = r.upper;
        }
        let scale = lo
            .iter()
            .chain(hi.iter())
            .filter(|v| v.is_finite())
            .fold(S::one(), |acc, v| acc.max(v.abs()));
        let mut lp = Self {
            n,
            m,
            col_start: start,
            col_row: rows_c,
            col_val: vals_c,
            shifted: cost.clone(),
            cost,
            lo,
            hi,
            status: vec![Status::Lower; n + m],
            basis: (n..n + m).collect(),
            x: vec![S::zero(); n + m],
            d: vec![S::zero(); n + m],
            binv: Vec::new(),
            weight: vec![S::one(); m],
            alpha: vec![S::zero(); n + m],
            column: vec![S::zero(); m],
            pivot_row: Vec::with_capacity(m),
            pivot_nz: Vec::with_capacity(m),
            artificial_lo: vec![false; n + m],
            artificial_hi: vec![false; n + m],
            since_inversion: 0,
            primal_stale: true,
            iterations: 0,
            unshifting: false,
            big: S::of(1e7).max(scale * S::of(1e3)),
        };
        lp.slack_basis();
        lp
    }

    fn slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        self.basis = (n..n + m).collect();
        self.binv = vec![S::zero(); m * m];
        for i in 0..m {
            self.binv[i * m + i] = -S::one();
            self.status[n + i] = Status::Basic;
        }
        self.weight = vec![S::one(); m];
        self.shifted = self.cost.clone();
        self.compute_duals();
        for j in 0..n {
            self.place_nonbasic(j);
        }
        self.since_inversion = 0;
        self.primal_stale = true;
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Changes the bounds of structural variable `j`; the basis is kept.
    pub fn set_bounds(&mut self, j: usize, lower: S, upper: S) {
        if self.lo[j] == lower && self.hi[j] == upper && !self.artificial_lo[j] && !self.artificial_hi[j] {
            return;
        }
        self.lo[j] = lower;
        self.hi[j] = upper;
        self.artificial_lo[j] = false;
        self.artificial_hi[j] = false;
        if self.status[j] != Status::Basic {
            self.place_nonbasic(j);
        }
        self.primal_stale = true;
    }

    pub fn bounds(&self, j: usize) -> (S, S) {
        (self.lo[j], self.hi[j])
    }

    /// Values of the structural variables.
    pub fn values(&self) -> Vec<S> {
        self.x[..self.n].to_vec()
    }

    pub fn objective(&self) -> S {
        (0..self.n).fold(S::zero(), |acc, j| acc + self.cost[j] * self.x[j])
    }

    fn dual_tol(&self) -> S {
        S::dual_tol()
    }

    /// Chooses the bound a nonbasic variable sits at so its reduced cost has
    /// the right sign, introducing a large temporary bound when the needed
    /// side is infinite.
    fn place_nonbasic(&mut self, j: usize) {
        let dj = self.d[j];
        let tol = self.dual_tol();
        if self.artificial_lo[j] {
            self.lo[j] = -S::infinity();
            self.artificial_lo[j] = false;
        }
        if self.artificial_hi[j] {
            self.hi[j] = S::infinity();
            self.artificial_hi[j] = false;
        }
        let lo_ok = self.lo[j].is_finite();
        let hi_ok = self.hi[j].is_finite();
        let status = match (lo_ok, hi_ok) {
            (true, true) => {
                if dj >= -tol || self.lo[j] == self.hi[j] {
                    Status::Lower
                } else {
                    Status::Upper
                }
            }
            (true, false) => {
                if dj >= -tol {
                    Status::Lower
                } else {
                    self.hi[j] = self.lo[j] + self.big;
                    self.artificial_hi[j] = true;
                    Status::Upper
                }
            }
            (false, true) => {
                if dj <= tol {
                    Status::Upper
                } else {
                    self.lo[j] = self.hi[j] - self.big;
                    self.artificial_lo[j] = true;
                    Status::Lower
                }
            }
            (false, false) => {
                if dj.abs() <= tol {
                    Status::Free
                } else if dj > S::zero() {
                    self.lo[j] = -self.big;
                    self.artificial_lo[j] = true;
                    Status::Lower
                } else {
                    self.hi[j] = self.big;
                    self.artificial_hi[j] = true;
                    Status::Upper
                }
            }
        };
        self.status[j] = status;
        self.x[j] = match status {
            Status::Lower => self.lo[j],
            Status::Upper => self.hi[j],
            _ => S::zero(),
        };
    }

    fn for_column(&self, j: usize, mut f: impl FnMut(usize, S)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else {
            f(j - self.n, -S::one());
        }
    }

    fn compute_primal(&mut self) {
        let m = self.m;
        let mut rhs = vec![S::zero(); m];
        for j in 0..self.n + m {
            if self.status[j] != Status::Basic && self.x[j] != S::zero() {
                let xj = self.x[j];
                self.for_column(j, |i, v| rhs[i] = rhs[i] - v * xj);
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut s = S::zero();
            for k in 0..m {
                if rhs[k] != S::zero() {
                    s = s + row[k] * rhs[k];
                }
            }
            self.x[self.basis[i]] = s;
        }
        self.primal_stale = false;
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        let mut y = vec![S::zero(); m];
        for i in 0..m {
            let cb = self.shifted[self.basis[i]];
            if cb != S::zero() {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] = y[k] + cb * row[k];
                }
            }
        }
        for j in 0..self.n + m {
            if self.status[j] == Status::Basic {
                self.d[j] = S::zero();
            } else {
                let mut dj = self.shifted[j];
                self.for_column(j, |i, v| dj = dj - y[i] * v);
                self.d[j] = dj;
            }
        }
    }

    /// Repairs reduced costs of the wrong sign left by rounding: boxed
    /// variables flip bounds, others get their cost shifted.
    fn restore_dual_feasibility(&mut self) {
        let tol = self.dual_tol();
        for j in 0..self.n + self.m {
            let wrong = match self.status[j] {
                Status::Lower => self.d[j] < -tol,
                Status::Upper => self.d[j] > tol,
                Status::Free => self.d[j].abs() > tol,
                Status::Basic => false,
            };
            if !wrong || self.lo[j] == self.hi[j] {
                continue;
            }
            let boxed = self.lo[j].is_finite() && self.hi[j].is_finite();
            if boxed && self.status[j] != Status::Free {
                if self.status[j] == Status::Lower {
                    self.status[j] = Status::Upper;
                    self.x[j] = self.hi[j];
                } else {
                    self.status[j] = Status::Lower;
                    self.x[j] = self.lo[j];
                }
                self.primal_stale = true;
            } else {
                self.shifted[j] = self.shifted[j] - self.d[j];
                self.d[j] = S::zero();
            }
        }
    }

    /// Rebuilds the inverse from scratch by Gauss-Jordan elimination,
    /// swapping in logicals for basis columns that turn out dependent.
    fn reinvert(&mut self) -> Result<(), String> {
        let m = self.m;
        let n = self.n;
        // Logical columns first: each pivots on its own row without fill.
        self.basis.sort_by_key(|&j| if j >= n { (0, j) } else { (1, j) });
        for _attempt in 0..=m {
            let mut mat = vec![S::zero(); m * m];
            for (k, &j) in self.basis.iter().enumerate() {
                let col = k;
                if j < n {
                    for e in self.col_start[j]..self.col_start[j + 1] {
                        mat[self.col_row[e] * m + col] = self.col_val[e];
                    }
                } else {
                    mat[(j - n) * m + col] = -S::one();
                }
            }
            let mut inv = vec![S::zero(); m * m];
            for i in 0..m {
                inv[i * m + i] = S::one();
            }
            let mut rows: Vec<usize> = (0..m).collect();
            let mut failed = None;
            for k in 0..m {
                let mut piv = k;
                let mut best = S::zero();
                for i in k..m {
                    let v = mat[i * m + k].abs();
                    if v > best {
                        best = v;
                        piv = i;
                    }
                }
                if best < S::of(1e-11) {
                    failed = Some(k);
                    break;
                }
                if piv != k {
                    rows.swap(piv, k);
                    for c in 0..m {
                        mat.swap(piv * m + c, k * m + c);
                        inv.swap(piv * m + c, k * m + c);
                    }
                }
                let p = mat[k * m + k];
                let pinv = S::one() / p;
                for c in 0..m {
                    mat[k * m + c] = mat[k * m + c] * pinv;
                    inv[k * m + c] = inv[k * m + c] * pinv;
                }
                let (pm, pi): (Vec<S>, Vec<S>) = (
                    mat[k * m..(k + 1) * m].to_vec(),
                    inv[k * m..(k + 1) * m].to_vec(),
                );
                let nz_m: Vec<usize> = (0..m).filter(|&c| pm[c] != S::zero()).collect();
                let nz_i: Vec<usize> = (0..m).filter(|&c| pi[c] != S::zero()).collect();
                for i in 0..m {
                    if i == k {
                        continue;
                    }
                    let f = mat[i * m + k];
                    if f == S::zero() {
                        continue;
                    }
                    for &c in &nz_m {
                        mat[i * m + c] = mat[i * m + c] - f * pm[c];
                    }
                    for &c in &nz_i {
                        inv[i * m + c] = inv[i * m + c] - f * pi[c];
                    }
                    mat[i * m + k] = S::zero();
                }
            }
            match failed {
                None => {
                    self.binv = inv;
                    for i in 0..m {
                        self.weight[i] = self.row_norm2(i);
                    }
                    self.since_inversion = 0;
                    return Ok(());
                }
                Some(k) => {
                    // Replace the dependent column with the logical of a row
                    // no earlier column pivoted on; that raises the rank.
                    let out = self.basis[k];
                    let row = rows[k];
                    if self.status[n + row] == Status::Basic {
                        return Err("singular basis of logicals".into());
                    }
                    self.basis[k] = n + row;
                    self.status[n + row] = Status::Basic;
                    self.status[out] = Status::Lower;
                    self.place_nonbasic(out);
                    self.primal_stale = true;
                }
            }
        }
        Err("basis repair did not converge".into())
    }

    fn row_norm2(&self, i: usize) -> S {
        self.binv[i * self.m..(i + 1) * self.m]
            .iter()
            .fold(S::zero(), |acc, &v| acc + v * v)
    }

    fn infeasibility(&self, j: usize) -> S {
        let xj = self.x[j];
        let tol = S::primal_tol();
        if xj < self.lo[j] - tol * (S::one() + self.lo[j].abs()) {
            self.lo[j] - xj
        } else if xj > self.hi[j] + tol * (S::one() + self.hi[j].abs()) {
            xj - self.hi[j]
        } else {
            S::zero()
        }
    }

    fn refresh(&mut self) -> Result<(), String> {
        self.reinvert()?;
        self.compute_duals();
        self.restore_dual_feasibility();
        self.compute_primal();
        Ok(())
    }

    /// Runs dual simplex iterations from the current basis.
    pub fn solve(&mut self) -> LpOutcome {
        let m = self.m;
        let n = self.n;
        if m == 0 {
            for j in 0..n {
                if self.lo[j] > self.hi[j] {
                    return LpOutcome::Infeasible;
                }
            }
            return self.finish();
        }
        for j in 0..n {
            if self.lo[j] > self.hi[j] {
                return LpOutcome::Infeasible;
            }
        }
        if self.primal_stale {
            self.compute_primal();
        }
        let limit = 50 * (n + m) + 10_000;
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut retried = false;
        let mut local = 0usize;
        loop {
            if local > limit {
                return LpOutcome::IterationLimit;
            }
            if self.since_inversion >= REINVERT_EVERY {
                if let Err(e) = self.refresh() {
                    return LpOutcome::Breakdown(e);
                }
            }

            // Leaving row.
            let mut r = usize::MAX;
            if bland {
                let mut best_var = usize::MAX;
                for i in 0..m {
                    if self.infeasibility(self.basis[i]) > S::zero() && self.basis[i] < best_var {
                        best_var = self.basis[i];
                        r = i;
                    }
                }
            } else {
                let mut best = S::zero();
                for i in 0..m {
                    let inf = self.infeasibility(self.basis[i]);
                    if inf > S::zero() {
                        let score = inf * inf / self.weight[i].max(S::of(1e-12));
                        if score > best {
                            best = score;
                            r = i;
                        }
                    }
                }
            }
            if r == usize::MAX {
                if self.since_inversion > 0 && !retried {
                    // Recompute basic values to shed accumulated drift.
                    retried = true;
                    self.compute_primal();
                    continue;
                }
                return self.finish();
            }
            retried = false;
            let p = self.basis[r];
            let to_lower = self.x[p] < self.lo[p];
            let s = if to_lower { S::one() } else { -S::one() };

            // Pivot row alpha_j = (row r of B^-1) . a_j for nonbasic j.
            let rho_start = r * m;
            for j in 0..n + m {
                if self.status[j] == Status::Basic {
                    continue;
                }
                let a = if j < n {
                    let mut acc = S::zero();
                    for k in self.col_start[j]..self.col_start[j + 1] {
                        acc = acc + self.binv[rho_start + self.col_row[k]] * self.col_val[k];
                    }
                    acc
                } else {
                    -self.binv[rho_start + (j - n)]
                };
                self.alpha[j] = a;
            }

            // Ratio test.
            let ptol = S::pivot_tol();
            let dtol = self.dual_tol();
            let eligible = |st: Status, a: S| -> bool {
                match st {
                    Status::Lower => a < -ptol,
                    Status::Upper => a > ptol,
                    Status::Free => a.abs() > ptol,
                    Status::Basic => false,
                }
            };
            let slack_of = |st: Status, dj: S| -> S {
                match st {
                    Status::Lower => dj.max(S::zero()),
                    Status::Upper => (-dj).max(S::zero()),
                    _ => S::zero(),
                }
            };
            let mut q = usize::MAX;
            if bland {
                let mut best = S::infinity();
                for j in 0..n + m {
                    let st = self.status[j];
                    if st == Status::Basic || self.lo[j] == self.hi[j] {
                        continue;
                    }
                    let a = s * self.alpha[j];
                    if !eligible(st, a) {
                        continue;
                    }
                    let ratio = slack_of(st, self.d[j]) / a.abs();
                    if ratio < best {
                        best = ratio;
                        q = j;
                    }
                }
            } else {
                let mut bound = S::infinity();
                for j in 0..n + m {
                    let st = self.status[j];
                    if st == Status::Basic || self.lo[j] == self.hi[j] {
                        continue;
                    }
                    let a = s * self.alpha[j];
                    if !eligible(st, a) {
                        continue;
                    }
                    let ratio = (slack_of(st, self.d[j]) + dtol) / a.abs();
                    if ratio < bound {
                        bound = ratio;
                    }
                }
                let mut best_pivot = S::zero();
                for j in 0..n + m {
                    let st = self.status[j];
                    if st == Status::Basic || self.lo[j] == self.hi[j] {
                        continue;
                    }
                    let a = s * self.alpha[j];
                    if !eligible(st, a) {
                        continue;
                    }
                    let ratio = slack_of(st, self.d[j]) / a.abs();
                    if ratio <= bound && a.abs() > best_pivot {
                        best_pivot = a.abs();
                        q = j;
                    }
                }
            }
            if q == usize::MAX {
                if self.since_inversion > 0 {
                    if let Err(e) = self.refresh() {
                        return LpOutcome::Breakdown(e);
                    }
                    continue;
                }
                return LpOutcome::Infeasible;
            }

            // Entering column in the current basis.
            for v in self.column.iter_mut() {
                *v = S::zero();
            }
            {
                let mut col = std::mem::take(&mut self.column);
                let binv = &self.binv;
                self.for_column(q, |k, v| {
                    for i in 0..m {
                        let b = binv[i * m + k];
                        if b != S::zero() {
                            col[i] = col[i] + b * v;
                        }
                    }
                });
                self.column = col;
            }
            let pivot = self.column[r];
            let aq = self.alpha[q];
            if (pivot - aq).abs() > S::of(1e-7) * (S::one() + aq.abs()) || pivot.abs() < ptol {
                if self.since_inversion == 0 {
                    return LpOutcome::Breakdown("inconsistent pivot after reinversion".into());
                }
                if let Err(e) = self.refresh() {
                    return LpOutcome::Breakdown(e);
                }
                continue;
            }

            // Dual step.
            let theta = slack_of(self.status[q], self.d[q]) / (s * aq).abs();
            if theta <= S::of(1e-12) {
                degenerate += 1;
                if degenerate > DEGENERATE_BEFORE_BLAND {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            if theta != S::zero() {
                let step = theta * s;
                for j in 0..n + m {
                    if self.status[j] != Status::Basic {
                        self.d[j] = self.d[j] + step * self.alpha[j];
                    }
                }
            }
            self.d[q] = S::zero();
            self.d[p] = theta * s;

            // Primal step: p goes to its violated bound, q enters.
            let target = if to_lower { self.lo[p] } else { self.hi[p] };
            let tp = (self.x[p] - target) / pivot;
            for i in 0..m {
                let c = self.column[i];
                if c != S::zero() {
                    let b = self.basis[i];
                    self.x[b] = self.x[b] - tp * c;
                }
            }
            self.x[q] = self.x[q] + tp;
            self.x[p] = target;
            self.status[p] = if to_lower { Status::Lower } else { Status::Upper };
            self.status[q] = Status::Basic;
            self.basis[r] = q;

            // Product-form update of the inverse and the edge weights.
            let pinv = S::one() / pivot;
            let mut prow = std::mem::take(&mut self.pivot_row);
            prow.clear();
            prow.extend(self.binv[r * m..(r + 1) * m].iter().map(|&v| v * pinv));
            let mut nz = std::mem::take(&mut self.pivot_nz);
            nz.clear();
            nz.extend((0..m).filter(|&k| prow[k] != S::zero()));
            let sparse = 3 * nz.len() < m;
            for i in 0..m {
                if i == r {
                    continue;
                }
                let c = self.column[i];
                if c == S::zero() {
                    continue;
                }
                let row = &mut self.binv[i * m..(i + 1) * m];
                if sparse {
                    let mut delta = S::zero();
                    for &k in &nz {
                        let old = row[k];
                        let new = old - c * prow[k];
                        row[k] = new;
                        delta = delta + new * new - old * old;
                    }
                    self.weight[i] = (self.weight[i] + delta).max(S::of(1e-12));
                } else {
                    let mut norm = S::zero();
                    for (b, &v) in row.iter_mut().zip(prow.iter()) {
                        let new = *b - c * v;
                        *b = new;
                        norm = norm + new * new;
                    }
                    self.weight[i] = norm;
                }
            }
            self.weight[r] = prow.iter().fold(S::zero(), |acc, &v| acc + v * v);
            self.binv[r * m..(r + 1) * m].copy_from_slice(&prow);
            self.pivot_row = prow;
            self.pivot_nz = nz;

            self.since_inversion += 1;
            self.iterations += 1;
            local += 1;
        }
    }

    fn finish(&mut self) -> LpOutcome {
        for j in 0..self.n {
            let at_artificial = (self.status[j] == Status::Lower && self.artificial_lo[j])
                || (self.status[j] == Status::Upper && self.artificial_hi[j]);
            if at_artificial {
                return LpOutcome::Unbounded;
            }
        }
        if self.shifted != self.cost && !self.unshifting {
            // Drop cost shifts and re-check optimality against the true costs.
            self.shifted = self.cost.clone();
            self.compute_duals();
            let tol = S::of(1e-7);
            let clean = (0..self.n + self.m).all(|j| match self.status[j] {
                Status::Lower => self.d[j] >= -tol || self.lo[j] == self.hi[j],
                Status::Upper => self.d[j] <= tol || self.lo[j] == self.hi[j],
                Status::Free => self.d[j].abs() <= tol,
                Status::Basic => true,
            });
            if !clean {
                self.restore_dual_feasibility();
                if self.primal_stale {
                    self.compute_primal();
                }
                self.unshifting = true;
                let outcome = self.solve();
                self.unshifting = false;
                return outcome;
            }
        }
        LpOutcome::Optimal
    }
}
