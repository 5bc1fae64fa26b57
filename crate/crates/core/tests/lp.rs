use gridcast_core::lp::{self, LpError, LpProblem, LpStatus, Relation, SolverOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod support;
use support::lp_oracle::{dual_bound, random_feasible_lp, vertex_optimum};

fn instance(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=8);
    let m = rng.random_range(1..=5);
    random_feasible_lp(&mut rng, n, m)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_vertex_enumeration(seed in any::<u64>()) {
        let p = instance(seed);
        let s = lp::solve(&p).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        prop_assert!(p.max_violation(&s.x) <= 1e-7);
        let best = vertex_optimum(&p).expect("feasible by construction");
        prop_assert!(rel_gap(s.objective_value, best) <= 1e-6, "{} vs {}", s.objective_value, best);
    }

    #[test]
    fn dual_points_never_beat_the_optimum(seed in any::<u64>(), y_seed in any::<u64>()) {
        let p = instance(seed);
        let s = lp::solve(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(y_seed);
        for _ in 0..20 {
            let y: Vec<f64> = (0..p.num_rows()).map(|_| rng.random_range(-3.0..3.0)).collect();
            let bound = dual_bound(&p, &y);
            prop_assert!(bound <= s.objective_value + 1e-7 * (1.0 + s.objective_value.abs()));
        }
    }

    #[test]
    fn objective_scales_with_costs(seed in any::<u64>(), lambda in 0.01f64..100.0) {
        let p = instance(seed);
        let mut q = p.clone();
        q.objective_mut().iter_mut().for_each(|c| *c *= lambda);
        let (a, b) = (lp::solve(&p).unwrap(), lp::solve(&q).unwrap());
        prop_assert_eq!(a.status, b.status);
        prop_assert!(rel_gap(b.objective_value, lambda * a.objective_value) <= 1e-6);
    }

    #[test]
    fn start_point_does_not_change_the_optimum(seed in any::<u64>(), x_seed in any::<u64>()) {
        let p = instance(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(x_seed);
        let x0: Vec<f64> = p.bounds().iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect();
        let a = lp::solve(&p).unwrap();
        let b = lp::solve_from(&p, &x0, &SolverOptions::default()).unwrap();
        prop_assert_eq!(b.status, LpStatus::Optimal);
        prop_assert!(rel_gap(a.objective_value, b.objective_value) <= 1e-6);
    }
}

#[test]
fn feasible_start_skips_phase_one() {
    // min -x - y, x + y <= 4, x, y in [0, 3]; start at the optimum (3, 1).
    let mut p = LpProblem::new(vec![-1.0, -1.0]);
    p.set_bounds(0, 0.0, 3.0);
    p.set_bounds(1, 0.0, 3.0);
    p.add_dense_row(&[1.0, 1.0], Relation::Le, 4.0);
    let s = lp::solve_from(&p, &[3.0, 1.0], &SolverOptions::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective_value + 4.0).abs() < 1e-12);
    assert!(s.iterations <= 1);
}

#[test]
fn bad_start_points_are_rejected() {
    let p = LpProblem::new(vec![1.0, 1.0]);
    let o = SolverOptions::default();
    assert_eq!(
        lp::solve_from(&p, &[0.0], &o),
        Err(LpError::StartLength {
            expected: 2,
            got: 1
        })
    );
    assert!(matches!(
        lp::solve_from(&p, &[0.0, f64::NAN], &o),
        Err(LpError::NonFinite(_))
    ));
}

#[test]
fn infeasible_start_still_finds_infeasibility() {
    let mut p = LpProblem::new(vec![1.0]);
    p.add_dense_row(&[1.0], Relation::Ge, 2.0);
    p.add_dense_row(&[1.0], Relation::Le, 1.0);
    assert_eq!(
        lp::solve_from(&p, &[5.0], &SolverOptions::default())
            .unwrap()
            .status,
        LpStatus::Infeasible
    );
}

#[test]
fn text_dump_lists_every_row_and_bound() {
    let p = instance(7);
    let text = lp::write_lp_format(&p);
    for i in 0..p.num_rows() {
        assert!(text.contains(&format!("c{i}:")), "{text}");
    }
    assert!(text.contains("Bounds"));
    assert!(text.trim_end().ends_with("End"));
}
