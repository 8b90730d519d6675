mod common;

use std::time::Instant;

use common::{enumerate_milp, random_milp, reference_lp, rel_close};
use hems_core::milp::{
    read_dump, solve_lp, solve_milp, solve_milp_with_starts, write_dump, MilpError, MilpProblem, MilpStatus, Sense,
    SolverControls,
};

#[test]
fn random_milps_match_enumeration() {
    let exact = SolverControls::new(0.0, 60.0);
    for seed in 0..60 {
        let p = random_milp(seed, 1 + (seed as usize % 8), 2 + (seed as usize % 10));
        let want = enumerate_milp(&p).expect("zero is feasible");
        let got = solve_milp(&p, &exact).unwrap();
        assert_eq!(got.status, MilpStatus::Optimal, "seed {seed}");
        assert!(rel_close(got.objective, want, 1e-6), "seed {seed}: {} vs {want}", got.objective);
        assert!(p.max_violation(&got.columns) < 1e-6, "seed {seed}");
    }
}

#[test]
fn relaxations_match_reference_lp() {
    for seed in 100..160 {
        let p = random_milp(seed, 4, 12);
        let want = reference_lp(&p, &p.lower, &p.upper).expect("zero is feasible");
        let got = solve_lp(&p).unwrap();
        assert!(rel_close(got.objective, want, 1e-7), "seed {seed}: {} vs {want}", got.objective);
    }
}

#[test]
fn infeasible_and_unbounded() {
    let mut p = MilpProblem::new();
    let x = p.add_binary(1.0);
    let y = p.add_binary(1.0);
    p.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
    assert_eq!(solve_milp(&p, &SolverControls::default()).unwrap().status, MilpStatus::Infeasible);

    let mut q = MilpProblem::new();
    let b = q.add_binary(0.0);
    let z = q.add_column(0.0, f64::INFINITY, -1.0);
    q.add_row(vec![(z, 1.0), (b, -1.0)], Sense::Ge, 0.0);
    assert_eq!(solve_milp(&q, &SolverControls::default()).unwrap().status, MilpStatus::Unbounded);
}

#[test]
fn lp_on_a_face_reports_the_objective() {
    let mut p = MilpProblem::new();
    let x = p.add_column(0.0, 1.0, -1.0);
    let y = p.add_column(0.0, 1.0, -1.0);
    p.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
    let s = solve_lp(&p).unwrap();
    assert!((s.objective + 1.0).abs() < 1e-9);
}

/// 0/1 knapsack with correlated weights and values; hard for plain branching.
fn hard_knapsack(n: usize) -> MilpProblem {
    let mut p = MilpProblem::new();
    let mut row = Vec::new();
    let mut total = 0.0;
    for i in 0..n {
        let w = 1000.0 + ((i * 7919) % 997) as f64;
        total += w;
        let j = p.add_binary(-(w + 10.0));
        row.push((j, w));
    }
    p.add_row(row, Sense::Le, (total / 2.0).floor() + 0.5);
    p
}

#[test]
fn time_limit_returns_the_incumbent() {
    let p = hard_knapsack(60);
    let limit = 0.3;
    let t = Instant::now();
    let s = solve_milp_with_starts(&p, &SolverControls::new(0.0, limit), &[vec![0.0; 60]]).unwrap();
    let wall = t.elapsed().as_secs_f64();
    assert_eq!(s.status, MilpStatus::TimeLimit);
    assert!(s.objective < 0.0);
    assert!(s.bound <= s.objective);
    assert!(wall < 2.0 * limit, "took {wall} s");
}

#[test]
fn node_limit_is_exact_and_deterministic() {
    let p = hard_knapsack(40);
    let c = SolverControls::new(0.0, 60.0).with_node_limit(Some(25));
    let a = solve_milp_with_starts(&p, &c, &[vec![0.0; 40]]).unwrap();
    let b = solve_milp_with_starts(&p, &c, &[vec![0.0; 40]]).unwrap();
    assert_eq!(a.status, MilpStatus::NodeLimit);
    assert_eq!(a.nodes, 25);
    assert_eq!(a.objective, b.objective);
    assert_eq!(a.columns, b.columns);
}

#[test]
fn no_incumbent_at_the_limit_is_an_error() {
    let p = hard_knapsack(40);
    let c = SolverControls::new(0.0, 0.0);
    assert!(matches!(solve_milp(&p, &c), Err(MilpError::NoIncumbentAtTimeout { .. })));
}

#[test]
fn wrong_length_start_is_rejected() {
    let p = hard_knapsack(4);
    assert!(matches!(
        solve_milp_with_starts(&p, &SolverControls::default(), &[vec![0.0; 3]]),
        Err(MilpError::InvalidProblem(_))
    ));
}

#[test]
fn dump_round_trip_solves_identically() {
    let p = random_milp(7, 6, 8);
    let q = read_dump(&write_dump(&p)).unwrap();
    assert_eq!(p, q);
    let exact = SolverControls::new(0.0, 60.0);
    assert_eq!(solve_milp(&p, &exact).unwrap().objective, solve_milp(&q, &exact).unwrap().objective);
}
