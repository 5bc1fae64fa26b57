//! Bounded primal simplex.
//!
//! Works on `A x + s = b` with one logical (slack) column per row whose
//! bounds encode the row relation, plus phase-one artificials for rows the
//! starting point violates. The basis inverse is kept dense and updated with
//! rank-one pivots that skip zero entries, which keeps the block-banded MPC
//! programs cheap. Nonbasic variables may sit anywhere inside their bounds,
//! so the solve starts from `x = clip(0)` (or a supplied point) instead of
//! an arbitrary vertex. Pricing uses Devex reference weights.

use alloc::vec;
use alloc::vec::Vec;

use super::{LpError, LpProblem, LpSolution, LpStatus, Relation};

const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Zero selects `50 * (rows + columns) + 1000`.
    pub max_iterations: usize,
    /// Consecutive degenerate pivots tolerated under Devex pricing before
    /// switching to Bland's rule until the objective strictly improves.
    pub degenerate_limit: usize,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Entries of the entering column below this are treated as zero.
    pub pivot_tol: f64,
    /// Smallest acceptable pivot when refactorizing the basis.
    pub breakdown_tol: f64,
    /// Iterations between recomputing duals and basic values from scratch.
    pub recompute_interval: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 0,
            degenerate_limit: 50,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-9,
            breakdown_tol: 1e-11,
            recompute_interval: 100,
        }
    }
}

pub fn solve(p: &LpProblem) -> Result<LpSolution, LpError> {
    solve_with(p, &SolverOptions::default())
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    /// Column-major dense basis inverse: column `k` is `binv[k*m..(k+1)*m]`.
    binv: Vec<f64>,
    d: Vec<f64>,
    opts: SolverOptions,
    iterations: usize,
    max_iterations: usize,
}

pub fn solve_with(p: &LpProblem, opts: &SolverOptions) -> Result<LpSolution, LpError> {
    solve_impl(p, opts, None)
}

/// Solves starting from `x0` (clipped to the bounds). When `x0` satisfies
/// every row the first phase is skipped entirely.
pub fn solve_from(p: &LpProblem, x0: &[f64], opts: &SolverOptions) -> Result<LpSolution, LpError> {
    if x0.len() != p.num_vars() {
        return Err(LpError::StartLength {
            expected: p.num_vars(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(LpError::NonFinite("start point"));
    }
    solve_impl(p, opts, Some(x0))
}

fn solve_impl(
    p: &LpProblem,
    opts: &SolverOptions,
    x0: Option<&[f64]>,
) -> Result<LpSolution, LpError> {
    p.validate()?;
    let n = p.num_vars();
    let m = p.num_rows();

    // Max-abs equilibration: rows first, then columns.
    let mut row_scale = vec![1.0; m];
    for (i, row) in p.rows().iter().enumerate() {
        let mx = row.coeffs.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs()));
        if mx > 0.0 {
            row_scale[i] = 1.0 / mx;
        }
    }
    let mut col_max = vec![0.0f64; n];
    for (i, row) in p.rows().iter().enumerate() {
        for &(j, v) in &row.coeffs {
            col_max[j] = col_max[j].max((v * row_scale[i]).abs());
        }
    }
    let col_scale: Vec<f64> = col_max
        .iter()
        .map(|&c| if c > 0.0 { 1.0 / c } else { 1.0 })
        .collect();

    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
    for (i, row) in p.rows().iter().enumerate() {
        for &(j, v) in &row.coeffs {
            cols[j].push((i, v * row_scale[i] * col_scale[j]));
        }
        cols[n + i].push((i, 1.0));
    }
    let mut lo = Vec::with_capacity(n + m);
    let mut hi = Vec::with_capacity(n + m);
    for (j, &(l, h)) in p.bounds().iter().enumerate() {
        lo.push(l / col_scale[j]);
        hi.push(h / col_scale[j]);
    }
    for row in p.rows() {
        let (l, h) = match row.relation {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (0.0, 0.0),
        };
        lo.push(l);
        hi.push(h);
    }
    let b: Vec<f64> = p
        .rows()
        .iter()
        .zip(&row_scale)
        .map(|(r, s)| r.rhs * s)
        .collect();
    let mut cost = vec![0.0; n + m];
    for j in 0..n {
        cost[j] = p.objective()[j] * col_scale[j];
    }
    let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if cmax > 0.0 {
        cost.iter_mut().for_each(|c| *c /= cmax);
    }

    // Starting point: the bound-clipped origin unless one was supplied.
    let mut x: Vec<f64> = (0..n + m)
        .map(|j| {
            let v = match x0 {
                Some(x0) if j < n => x0[j] / col_scale[j],
                _ => 0.0,
            };
            v.clamp(lo[j], hi[j])
        })
        .collect();
    let mut residual = b.clone();
    for j in 0..n {
        if x[j] != 0.0 {
            for &(i, v) in &cols[j] {
                residual[i] -= v * x[j];
            }
        }
    }

    let mut basis = vec![0; m];
    let mut pos = vec![NONBASIC; n + m];
    let mut binv = vec![0.0; m * m];
    let mut artificial = Vec::new();
    for i in 0..m {
        let s = n + i;
        let r = residual[i];
        if r >= lo[s] - opts.feasibility_tol && r <= hi[s] + opts.feasibility_tol {
            x[s] = r;
            basis[i] = s;
            pos[s] = i;
            binv[i * m + i] = 1.0;
        } else {
            x[s] = r.clamp(lo[s], hi[s]);
            let gap = r - x[s];
            let sign = if gap > 0.0 { 1.0 } else { -1.0 };
            let a = cols.len();
            cols.push(vec![(i, sign)]);
            lo.push(0.0);
            hi.push(f64::INFINITY);
            x.push(gap.abs());
            pos.push(i);
            basis[i] = a;
            binv[i * m + i] = sign;
            artificial.push(a);
        }
    }
    let total = cols.len();
    cost.resize(total, 0.0);

    let max_iterations = if opts.max_iterations == 0 {
        50 * (m + total) + 1000
    } else {
        opts.max_iterations
    };
    let mut s = Simplex {
        m,
        cols,
        lo,
        hi,
        x,
        b,
        basis,
        pos,
        binv,
        d: vec![0.0; total],
        opts: *opts,
        iterations: 0,
        max_iterations,
    };

    if !artificial.is_empty() {
        let mut phase1 = vec![0.0; total];
        for &a in &artificial {
            phase1[a] = 1.0;
        }
        s.run(&phase1)?;
        let infeasibility: f64 = artificial.iter().map(|&a| s.x[a]).sum();
        let scale = s.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if infeasibility > 1e-8 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![f64::NAN; n],
                objective_value: f64::NAN,
                iterations: s.iterations,
            });
        }
        for &a in &artificial {
            s.hi[a] = 0.0;
            if s.pos[a] == NONBASIC {
                s.x[a] = 0.0;
            }
        }
    }

    let status = match s.run(&cost)? {
        PhaseEnd::Optimal => LpStatus::Optimal,
        PhaseEnd::Unbounded => LpStatus::Unbounded,
    };
    let x: Vec<f64> = (0..n)
        .map(|j| (s.x[j] * col_scale[j]).clamp(p.bounds()[j].0, p.bounds()[j].1))
        .collect();
    let objective_value = match status {
        LpStatus::Optimal => p.evaluate(&x),
        LpStatus::Unbounded => f64::NEG_INFINITY,
        LpStatus::Infeasible => f64::NAN,
    };
    Ok(LpSolution {
        status,
        x,
        objective_value,
        iterations: s.iterations,
    })
}

impl Simplex {
    fn run(&mut self, cost: &[f64]) -> Result<PhaseEnd, LpError> {
        let m = self.m;
        let total = self.cols.len();
        let tol = self.opts.feasibility_tol;
        self.recompute_duals(cost);
        let mut bland = false;
        let mut degenerate_run = 0usize;
        let mut since_recompute = 0usize;
        let mut alpha = vec![0.0; m];
        let mut rho = vec![0.0; m];
        let mut rho_nz: Vec<usize> = Vec::with_capacity(m);
        let mut verified = false;
        // Devex reference weights.
        let mut weights = vec![1.0f64; total];

        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }
            if since_recompute >= self.opts.recompute_interval {
                self.recompute_primal();
                self.recompute_duals(cost);
                since_recompute = 0;
            }

            // Pricing.
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..total {
                if self.pos[j] != NONBASIC {
                    continue;
                }
                let dj = self.d[j];
                let eligible = (dj < -self.opts.optimality_tol && self.x[j] < self.hi[j] - tol)
                    || (dj > self.opts.optimality_tol && self.x[j] > self.lo[j] + tol);
                if !eligible {
                    continue;
                }
                if bland {
                    entering = Some(j);
                    break;
                }
                let score = dj * dj / weights[j];
                if score > best {
                    best = score;
                    entering = Some(j);
                }
            }
            let Some(q) = entering else {
                if verified {
                    return Ok(PhaseEnd::Optimal);
                }
                // Confirm optimality against freshly computed values before
                // stopping; drift in the updated inverse can hide candidates.
                self.recompute_primal();
                let scale = self.b.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                if self.max_residual() > 1e-9 * scale {
                    self.refactor()?;
                    self.recompute_primal();
                }
                self.recompute_duals(cost);
                since_recompute = 0;
                verified = true;
                continue;
            };
            verified = false;
            let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };

            // alpha = B^-1 a_q
            alpha.iter_mut().for_each(|a| *a = 0.0);
            for &(k, v) in &self.cols[q] {
                for (a, b) in alpha.iter_mut().zip(&self.binv[k * m..(k + 1) * m]) {
                    *a += b * v;
                }
            }

            // Ratio test.
            let mut theta = if dir > 0.0 {
                self.hi[q] - self.x[q]
            } else {
                self.x[q] - self.lo[q]
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = alpha[i];
                if a.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let j = self.basis[i];
                let delta = dir * a;
                let (limit, bound) = if delta > 0.0 {
                    if self.lo[j] == f64::NEG_INFINITY {
                        continue;
                    }
                    ((self.x[j] - self.lo[j]).max(0.0) / delta, self.lo[j])
                } else {
                    if self.hi[j] == f64::INFINITY {
                        continue;
                    }
                    ((self.hi[j] - self.x[j]).max(0.0) / -delta, self.hi[j])
                };
                let better = match leave {
                    _ if limit < theta - 1e-12 => true,
                    Some((p, _)) if limit <= theta + 1e-12 => {
                        if bland {
                            j < self.basis[p]
                        } else {
                            a.abs() > alpha[p].abs()
                        }
                    }
                    _ => false,
                };
                if better {
                    theta = limit;
                    leave = Some((i, bound));
                }
            }
            if theta == f64::INFINITY {
                return Ok(PhaseEnd::Unbounded);
            }

            self.iterations += 1;
            since_recompute += 1;
            if theta <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > self.opts.degenerate_limit {
                    bland = true;
                }
            } else {
                // Strict progress rules out a cycle through this point.
                degenerate_run = 0;
                bland = false;
            }

            let step = dir * theta;
            self.x[q] += step;
            for i in 0..m {
                if alpha[i] != 0.0 {
                    let j = self.basis[i];
                    self.x[j] -= step * alpha[i];
                }
            }

            let Some((p, bound)) = leave else {
                // Bound flip: entering variable reached its own opposite bound.
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                continue;
            };

            let leaving = self.basis[p];
            self.x[leaving] = bound;
            let pivot = alpha[p];

            // Reduced-cost update uses the pre-pivot row p of B^-1.
            rho_nz.clear();
            for k in 0..m {
                rho[k] = self.binv[k * m + p];
                if rho[k] != 0.0 {
                    rho_nz.push(k);
                }
            }
            let theta_d = self.d[q] / pivot;
            let wq = weights[q];
            for j in 0..total {
                if self.pos[j] != NONBASIC || j == q {
                    continue;
                }
                let dot: f64 = self.cols[j].iter().map(|&(k, v)| rho[k] * v).sum();
                if dot != 0.0 {
                    self.d[j] -= theta_d * dot;
                    let r = dot / pivot;
                    weights[j] = weights[j].max(r * r * wq);
                }
            }
            self.d[q] = 0.0;
            self.d[leaving] = -theta_d;
            weights[leaving] = (wq / (pivot * pivot)).max(1.0);

            // Rank-one update of B^-1.
            let inv = 1.0 / pivot;
            for &k in &rho_nz {
                let f = rho[k] * inv;
                let col = &mut self.binv[k * m..(k + 1) * m];
                for (b, a) in col.iter_mut().zip(&alpha) {
                    *b -= a * f;
                }
                col[p] = f;
            }

            self.basis[p] = q;
            self.pos[q] = p;
            self.pos[leaving] = NONBASIC;
        }
    }

    fn recompute_duals(&mut self, cost: &[f64]) {
        let m = self.m;
        let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        let y: Vec<f64> = (0..m)
            .map(|k| {
                self.binv[k * m..(k + 1) * m]
                    .iter()
                    .zip(&cb)
                    .map(|(b, c)| b * c)
                    .sum()
            })
            .collect();
        for j in 0..self.cols.len() {
            self.d[j] = if self.pos[j] == NONBASIC {
                cost[j] - self.cols[j].iter().map(|&(k, v)| y[k] * v).sum::<f64>()
            } else {
                0.0
            };
        }
    }

    /// x_B = B^-1 (b - N x_N)
    fn recompute_primal(&mut self) {
        let m = self.m;
        let mut r = self.b.clone();
        for j in 0..self.cols.len() {
            if self.pos[j] == NONBASIC && self.x[j] != 0.0 {
                for &(i, v) in &self.cols[j] {
                    r[i] -= v * self.x[j];
                }
            }
        }
        let mut xb = vec![0.0; m];
        for (k, rk) in r.iter().enumerate() {
            if *rk != 0.0 {
                for (x, b) in xb.iter_mut().zip(&self.binv[k * m..(k + 1) * m]) {
                    *x += b * rk;
                }
            }
        }
        for (i, v) in xb.into_iter().enumerate() {
            self.x[self.basis[i]] = v;
        }
    }

    fn max_residual(&self) -> f64 {
        let mut r = self.b.clone();
        for j in 0..self.cols.len() {
            if self.x[j] != 0.0 {
                for &(i, v) in &self.cols[j] {
                    r[i] -= v * self.x[j];
                }
            }
        }
        r.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Rebuilds B^-1 by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + c] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        let mut pivot_a = vec![0.0; m];
        let mut pivot_inv = vec![0.0; m];
        for col in 0..m {
            let (piv_row, piv) = (col..m)
                .map(|r| (r, a[r * m + col]))
                .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                .unwrap_or((col, 0.0));
            if piv.abs() < self.opts.breakdown_tol {
                return Err(LpError::NumericalBreakdown(piv.abs()));
            }
            if piv_row != col {
                for k in 0..m {
                    a.swap(piv_row * m + k, col * m + k);
                    inv.swap(piv_row * m + k, col * m + k);
                }
            }
            let inv_piv = 1.0 / piv;
            // Columns left of `col` are already eliminated in every row.
            for (p, v) in pivot_a[col..]
                .iter_mut()
                .zip(&mut a[col * m + col..(col + 1) * m])
            {
                *v *= inv_piv;
                *p = *v;
            }
            for (p, v) in pivot_inv.iter_mut().zip(&mut inv[col * m..(col + 1) * m]) {
                *v *= inv_piv;
                *p = *v;
            }
            let nz: Vec<usize> = (0..m).filter(|&k| pivot_inv[k] != 0.0).collect();
            for r in 0..m {
                let f = a[r * m + col];
                if r == col || f == 0.0 {
                    continue;
                }
                for (v, p) in a[r * m + col..(r + 1) * m].iter_mut().zip(&pivot_a[col..]) {
                    *v -= f * p;
                }
                let row = &mut inv[r * m..(r + 1) * m];
                for &k in &nz {
                    row[k] -= f * pivot_inv[k];
                }
            }
        }
        // Rows of `inv` are indexed by basis position because columns of `a`
        // were; store it transposed.
        for i in 0..m {
            for k in 0..m {
                self.binv[k * m + i] = inv[i * m + k];
            }
        }
        Ok(())
    }
}
