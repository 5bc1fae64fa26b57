//! Random bounded LPs and an exhaustive vertex-enumeration optimum.

use gridcast_core::lp::{LpProblem, Relation};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Box-bounded LP with `n` variables and `m` rows, feasible by construction
/// around a random interior point. At most one row is an equality.
pub fn random_feasible_lp(rng: &mut impl Rng, n: usize, m: usize) -> LpProblem {
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    let mut p = LpProblem::new(c);
    let mut x0 = Vec::with_capacity(n);
    for j in 0..n {
        let lo = rng.random_range(-10.0..0.0);
        let hi = lo + rng.random_range(0.5..15.0);
        p.set_bounds(j, lo, hi);
        x0.push(rng.random_range(lo..hi));
    }
    for i in 0..m {
        let a: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.75) {
                    rng.random_range(-4.0..4.0)
                } else {
                    0.0
                }
            })
            .collect();
        let ax: f64 = a.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let slack = rng.random_range(0.0..3.0);
        let relation = match rng.random_range(0..10) {
            0 if i == 0 => Relation::Eq,
            0..=4 => Relation::Le,
            _ => Relation::Ge,
        };
        let rhs = match relation {
            Relation::Le => ax + slack,
            Relation::Ge => ax - slack,
            Relation::Eq => ax,
        };
        p.add_dense_row(&a, relation, rhs);
    }
    p
}

fn dense_row(p: &LpProblem, i: usize) -> Vec<f64> {
    let mut a = vec![0.0; p.num_vars()];
    for &(j, v) in &p.rows()[i].coeffs {
        a[j] += v;
    }
    a
}

/// Minimum objective over all basic solutions of a box-bounded LP: every
/// choice of active rows, variables solved from them, and the remaining
/// variables at one of their bounds. `None` when no vertex is feasible.
pub fn vertex_optimum(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let rows: Vec<Vec<f64>> = (0..p.num_rows()).map(|i| dense_row(p, i)).collect();
    let eq: Vec<usize> = (0..rows.len())
        .filter(|&i| p.rows()[i].relation == Relation::Eq)
        .collect();
    let ineq: Vec<usize> = (0..rows.len())
        .filter(|&i| p.rows()[i].relation != Relation::Eq)
        .collect();
    let bounds = p.bounds();
    let tol = 1e-7;
    let feasible = |x: &[f64]| {
        x.iter()
            .zip(bounds)
            .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol)
            && rows.iter().zip(p.rows()).all(|(a, r)| {
                let ax: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
                let scale = 1.0 + r.rhs.abs();
                match r.relation {
                    Relation::Le => ax <= r.rhs + tol * scale,
                    Relation::Ge => ax >= r.rhs - tol * scale,
                    Relation::Eq => (ax - r.rhs).abs() <= tol * scale,
                }
            })
    };
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << ineq.len()) {
        let active: Vec<usize> = eq
            .iter()
            .copied()
            .chain(
                ineq.iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &i)| i),
            )
            .collect();
        let k = active.len();
        if k > n {
            continue;
        }
        for free in 0u32..(1 << n) {
            if free.count_ones() as usize != k {
                continue;
            }
            let free_idx: Vec<usize> = (0..n).filter(|j| free >> j & 1 == 1).collect();
            let fixed_idx: Vec<usize> = (0..n).filter(|j| free >> j & 1 == 0).collect();
            for at_hi in 0u32..(1 << fixed_idx.len()) {
                let mut x = vec![0.0; n];
                for (b, &j) in fixed_idx.iter().enumerate() {
                    x[j] = if at_hi >> b & 1 == 1 {
                        bounds[j].1
                    } else {
                        bounds[j].0
                    };
                }
                if k > 0 {
                    let a = DMatrix::from_fn(k, k, |r, c| rows[active[r]][free_idx[c]]);
                    let rhs = DVector::from_fn(k, |r, _| {
                        let i = active[r];
                        p.rows()[i].rhs - fixed_idx.iter().map(|&j| rows[i][j] * x[j]).sum::<f64>()
                    });
                    let lu = a.lu();
                    if lu.determinant().abs() < 1e-10 {
                        continue;
                    }
                    let Some(sol) = lu.solve(&rhs) else { continue };
                    for (c, &j) in free_idx.iter().enumerate() {
                        x[j] = sol[c];
                    }
                }
                if feasible(&x) {
                    let obj = p.evaluate(&x);
                    if best.is_none_or(|b| obj < b) {
                        best = Some(obj);
                    }
                }
            }
        }
    }
    best
}

/// Lower bound from a dual point `y` (sign-corrected per row relation):
/// `b.y + sum_j min(d_j lo_j, d_j hi_j)` with `d = c - A^T y`.
pub fn dual_bound(p: &LpProblem, y: &[f64]) -> f64 {
    let n = p.num_vars();
    let mut d = p.objective().to_vec();
    let mut value = 0.0;
    for (i, row) in p.rows().iter().enumerate() {
        let yi = match row.relation {
            Relation::Le => -y[i].abs(),
            Relation::Ge => y[i].abs(),
            Relation::Eq => y[i],
        };
        value += row.rhs * yi;
        for &(j, v) in &row.coeffs {
            d[j] -= v * yi;
        }
    }
    for j in 0..n {
        let (lo, hi) = p.bounds()[j];
        value += (d[j] * lo).min(d[j] * hi);
    }
    value
}
