#![allow(dead_code)]

use hems_core::milp::{MilpProblem, Sense};
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// LP optimum of `p` with binaries treated as continuous, by minilp.
/// `None` when infeasible or unbounded.
pub fn reference_lp(p: &MilpProblem, lower: &[f64], upper: &[f64]) -> Option<f64> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..p.num_cols()).map(|j| lp.add_var(p.objective[j], (lower[j], upper[j]))).collect();
    for row in &p.rows {
        let expr: Vec<_> = row.coeffs.iter().map(|&(j, a)| (vars[j], a)).collect();
        let op = match row.sense {
            Sense::Le => ComparisonOp::Le,
            Sense::Eq => ComparisonOp::Eq,
            Sense::Ge => ComparisonOp::Ge,
        };
        lp.add_constraint(expr.as_slice(), op, row.rhs);
    }
    lp.solve().ok().map(|s| s.objective())
}

/// MILP optimum by trying every binary pattern.
pub fn enumerate_milp(p: &MilpProblem) -> Option<f64> {
    let bins: Vec<usize> = (0..p.num_cols()).filter(|&j| p.binary[j]).collect();
    assert!(bins.len() <= 20, "too many binaries to enumerate");
    let mut best: Option<f64> = None;
    let (mut lo, mut hi) = (p.lower.clone(), p.upper.clone());
    for mask in 0u32..(1u32 << bins.len()) {
        let mut skip = false;
        for (b, &j) in bins.iter().enumerate() {
            let v = f64::from((mask >> b) & 1);
            if v < p.lower[j] || v > p.upper[j] {
                skip = true;
                break;
            }
            lo[j] = v;
            hi[j] = v;
        }
        if skip {
            continue;
        }
        if let Some(obj) = reference_lp(p, &lo, &hi) {
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Random bounded MILP that always admits the all-zero point.
pub fn random_milp(seed: u64, n_bin: usize, n_cont: usize) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MilpProblem::new();
    for _ in 0..n_bin {
        p.add_binary(rng.random_range(-10.0..10.0));
    }
    for _ in 0..n_cont {
        let hi = rng.random_range(0.5..5.0);
        p.add_column(0.0, hi, rng.random_range(-5.0..5.0));
    }
    let n = n_bin + n_cont;
    let rows = rng.random_range(2..=n.max(3) / 2 + 2);
    for _ in 0..rows {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.4) {
                coeffs.push((j, rng.random_range(-4.0..6.0)));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.random_range(0..n), 1.0));
        }
        match rng.random_range(0..3) {
            0 => p.add_row(coeffs, Sense::Le, rng.random_range(0.5..8.0)),
            1 => p.add_row(coeffs, Sense::Ge, rng.random_range(-8.0..0.0)),
            _ => {
                // Equality through the origin keeps zero feasible.
                p.add_row(coeffs, Sense::Eq, 0.0)
            }
        };
    }
    p
}
