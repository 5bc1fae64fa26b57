use alloc::string::String;
use core::fmt::Write;

use super::{LpProblem, Relation};

fn term(out: &mut String, first: bool, coeff: f64, var: usize) {
    if first {
        let _ = write!(out, " {coeff:e} x{var}");
    } else if coeff < 0.0 {
        let _ = write!(out, " - {:e} x{var}", -coeff);
    } else {
        let _ = write!(out, " + {coeff:e} x{var}");
    }
}

/// Renders `p` in CPLEX LP text format, readable by common external solvers.
/// Variables are named `x0 .. x{n-1}` and rows `c0 .. c{m-1}`.
pub fn write_lp_format(p: &LpProblem) -> String {
    let mut out = String::from("\\ generated by gridcast-core\nMinimize\n obj:");
    let mut first = true;
    for (j, &c) in p.objective().iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, j);
            first = false;
        }
    }
    if first {
        out.push_str(" 0 x0");
    }
    out.push_str("\nSubject To\n");
    for (i, row) in p.rows().iter().enumerate() {
        let _ = write!(out, " c{i}:");
        if row.coeffs.is_empty() {
            out.push_str(" 0 x0");
        }
        for (k, &(j, v)) in row.coeffs.iter().enumerate() {
            term(&mut out, k == 0, v, j);
        }
        let op = match row.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {:e}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (j, &(lo, hi)) in p.bounds().iter().enumerate() {
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " x{j} free");
            }
            (true, false) => {
                let _ = writeln!(out, " x{j} >= {lo:e}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= x{j} <= {hi:e}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo:e} <= x{j} <= {hi:e}");
            }
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn renders_all_sections() {
        let mut p = LpProblem::new(vec![1.0, -2.0]);
        p.add_dense_row(&[1.0, 1.0], Relation::Ge, 2.0);
        p.add_dense_row(&[1.0, -1.0], Relation::Le, 1.0);
        p.set_bounds(1, f64::NEG_INFINITY, 4.0);
        let s = write_lp_format(&p);
        assert!(s.contains("Minimize\n obj: 1e0 x0 - 2e0 x1\n"));
        assert!(s.contains(" c0: 1e0 x0 + 1e0 x1 >= 2e0\n"));
        assert!(s.contains(" c1: 1e0 x0 - 1e0 x1 <= 1e0\n"));
        assert!(s.contains(" x0 >= 0e0\n"));
        assert!(s.contains(" -inf <= x1 <= 4e0\n"));
        assert!(s.ends_with("End\n"));
    }
}
