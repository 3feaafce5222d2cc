use crate::error::SolverError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
}

#[derive(Debug, Clone)]
pub struct Variable<S> {
    pub name: String,
    pub lower: S,
    pub upper: S,
    pub cost: S,
    pub kind: VarKind,
}

/// A linear row `lower <= sum(coef * x) <= upper`; either side may be infinite.
#[derive(Debug, Clone)]
pub struct Row<S> {
    pub name: String,
    pub terms: Vec<(usize, S)>,
    pub lower: S,
    pub upper: S,
}

/// Minimisation problem with bounded variables and ranged rows.
#[derive(Debug, Clone, Default)]
pub struct Problem<S> {
    pub vars: Vec<Variable<S>>,
    pub rows: Vec<Row<S>>,
    /// Constant added to the objective.
    pub offset: S,
}

impl<S: Scalar> Problem<S> {
    pub fn new() -> Self {
        Self {
            vars: Vec::new(),
            rows: Vec::new(),
            offset: S::zero(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: S, upper: S, cost: S, kind: VarKind) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            cost,
            kind,
        });
        self.vars.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, terms: Vec<(usize, S)>, lower: S, upper: S) -> usize {
        self.rows.push(Row {
            name: name.into(),
            terms,
            lower,
            upper,
        });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn integer_vars(&self) -> Vec<usize> {
        (0..self.vars.len())
            .filter(|&j| self.vars[j].kind == VarKind::Integer)
            .collect()
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.kind == VarKind::Integer)
    }

    /// Copy with every integer variable turned continuous.
    pub fn relaxed(&self) -> Self {
        let mut p = self.clone();
        for v in &mut p.vars {
            v.kind = VarKind::Continuous;
        }
        p
    }

    pub fn objective(&self, x: &[S]) -> S {
        self.vars
            .iter()
            .zip(x)
            .fold(self.offset, |acc, (v, &xj)| acc + v.cost * xj)
    }

    pub fn activity(&self, row: usize, x: &[S]) -> S {
        self.rows[row]
            .terms
            .iter()
            .fold(S::zero(), |acc, &(j, c)| acc + c * x[j])
    }

    /// Largest absolute violation of any bound or row by `x`.
    pub fn max_violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for (v, &xj) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xj).max(xj - v.upper);
        }
        for (i, r) in self.rows.iter().enumerate() {
            let act = self.activity(i, x);
            worst = worst.max(r.lower - act).max(act - r.upper);
        }
        worst
    }

    /// Largest distance of an integer variable from the nearest integer.
    pub fn max_fractionality(&self, x: &[S]) -> S {
        self.vars
            .iter()
            .zip(x)
            .filter(|(v, _)| v.kind == VarKind::Integer)
            .fold(S::zero(), |acc, (_, &xj)| acc.max((xj - xj.round()).abs()))
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        for v in &self.vars {
            if v.lower.is_nan() || v.upper.is_nan() || !v.cost.is_finite() {
                return Err(SolverError::NonFinite(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(SolverError::InvertedBounds { name: v.name.clone() });
            }
            if v.kind == VarKind::Integer && !(v.lower.is_finite() && v.upper.is_finite()) {
                return Err(SolverError::UnboundedInteger { name: v.name.clone() });
            }
        }
        for r in &self.rows {
            if r.lower.is_nan() || r.upper.is_nan() {
                return Err(SolverError::NonFinite(r.name.clone()));
            }
            if r.lower > r.upper {
                return Err(SolverError::InvertedRow { name: r.name.clone() });
            }
            for &(j, c) in &r.terms {
                if j >= self.vars.len() {
                    return Err(SolverError::UnknownVariable {
                        row: r.name.clone(),
                        index: j,
                    });
                }
                if !c.is_finite() {
                    return Err(SolverError::NonFinite(r.name.clone()));
                }
            }
        }
        if !self.offset.is_finite() {
            return Err(SolverError::NonFinite("objective offset".into()));
        }
        Ok(())
    }
}
