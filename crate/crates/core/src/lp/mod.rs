//! Linear programming: problem model, a bounded primal simplex solver and
//! an LP text writer.

mod format;
mod simplex;

use alloc::vec::Vec;

pub use format::write_lp_format;
pub use simplex::{solve, solve_from, solve_with, SolverOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("row {row} references variable {index} but the problem has {n} variables")]
    BadIndex { row: usize, index: usize, n: usize },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("variable {0} has lower bound above upper bound")]
    BadBounds(usize),
    #[error("numerical breakdown: basis pivot {0:e} below tolerance")]
    NumericalBreakdown(f64),
    #[error("start point has {got} entries, expected {expected}")]
    StartLength { expected: usize, got: usize },
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One constraint row `a·x (<=|=|>=) b`; `coeffs` holds the nonzeros of `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c·x` subject to rows and per-variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    rows: Vec<Row>,
    bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// New problem with all variables bounded to `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            rows: Vec::new(),
            bounds: alloc::vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_mut(&mut self) -> &mut [f64] {
        &mut self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    /// Adds a row from sparse `(index, coefficient)` pairs. Zero entries are
    /// dropped and repeated indices summed.
    pub fn add_row(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (j, v) in coeffs {
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(e) => e.1 += v,
                None => merged.push((j, v)),
            }
        }
        merged.retain(|(_, v)| *v != 0.0);
        merged.sort_by_key(|(j, _)| *j);
        self.rows.push(Row {
            coeffs: merged,
            relation,
            rhs,
        });
    }

    pub fn add_dense_row(&mut self, coeffs: &[f64], relation: Relation, rhs: f64) {
        self.add_row(coeffs.iter().copied().enumerate(), relation, rhs);
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite("rhs"));
            }
            for &(j, v) in &row.coeffs {
                if j >= n {
                    return Err(LpError::BadIndex {
                        row: r,
                        index: j,
                        n,
                    });
                }
                if !v.is_finite() {
                    return Err(LpError::NonFinite("constraint"));
                }
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(LpError::BadBounds(j));
            }
        }
        Ok(())
    }

    /// Objective value at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`, each row scaled by its
    /// largest absolute coefficient.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let scale = row
                .coeffs
                .iter()
                .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
                .max(1e-300);
            let lhs: f64 = row.coeffs.iter().map(|&(j, v)| v * x[j]).sum();
            let viol = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol / scale);
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - x[j]).max(x[j] - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; meaningful only when `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
