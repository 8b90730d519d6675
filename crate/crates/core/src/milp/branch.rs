//! Best-first branch-and-bound over binary columns.
//!
//! Before the best-first search the solver looks for a first incumbent: any
//! caller-supplied starts are completed by one LP each, then the root
//! relaxation is rounded and completed the same way, and failing both a
//! depth-first search with backtracking runs until an integer point appears.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::simplex::{solve_relaxation, LpOutcome};
use super::{relative_gap, MilpError, MilpProblem, MilpSolution, MilpStatus, SolverControls, INT_TOL, OBJ_TOL};

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    /// (column, value) pairs fixed on the path from the root.
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: lowest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    x: Vec<f64>,
    objective: f64,
}

struct Search<'a> {
    p: &'a MilpProblem,
    controls: SolverControls,
    start: Instant,
    nodes: usize,
    incumbent: Option<Incumbent>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl<'a> Search<'a> {
    fn limit_reached(&self) -> Option<MilpStatus> {
        if self.controls.node_limit.is_some_and(|n| self.nodes >= n) {
            Some(MilpStatus::NodeLimit)
        } else if self.start.elapsed() >= self.controls.time_limit {
            Some(MilpStatus::TimeLimit)
        } else {
            None
        }
    }

    fn solve_node(&mut self, fixings: &[(usize, f64)]) -> Result<LpOutcome, MilpError> {
        self.lower.copy_from_slice(&self.p.lower);
        self.upper.copy_from_slice(&self.p.upper);
        for &(j, v) in fixings {
            self.lower[j] = v;
            self.upper[j] = v;
        }
        self.nodes += 1;
        solve_relaxation(self.p, &self.lower, &self.upper)
    }

    fn prune_tol(&self, incumbent: f64) -> f64 {
        (self.controls.mip_gap * incumbent.abs()).max(OBJ_TOL * incumbent.abs().max(1.0))
    }

    fn offer(&mut self, x: Vec<f64>, objective: f64) {
        let better = self.incumbent.as_ref().is_none_or(|inc| objective < inc.objective - OBJ_TOL * inc.objective.abs().max(1.0));
        if better {
            let x = snap_binaries(self.p, x);
            let objective = self.p.objective_value(&x);
            self.incumbent = Some(Incumbent { x, objective });
        }
    }

    /// Fix every binary to its rounded value in `x` and solve for the rest.
    fn complete(&mut self, x: &[f64]) -> Result<(), MilpError> {
        let fixings: Vec<(usize, f64)> = (0..self.p.num_cols())
            .filter(|&j| self.p.binary[j])
            .map(|j| (j, x[j].round().clamp(self.p.lower[j], self.p.upper[j])))
            .collect();
        if let LpOutcome::Optimal { x, objective } = self.solve_node(&fixings)? {
            self.offer(x, objective);
        }
        Ok(())
    }

    /// Depth-first search with backtracking until the first incumbent.
    ///
    /// Children are explored nearest-rounding first. Whatever is still open
    /// when an incumbent appears is handed to the best-first phase.
    fn depth_first(&mut self, root_x: Vec<f64>, root_obj: f64, heap: &mut BinaryHeap<Node>, seq: &mut usize) -> Result<(), MilpError> {
        struct Open {
            fixings: Vec<(usize, f64)>,
            bound: f64,
            solved: Option<(Vec<f64>, f64)>,
        }
        let mut stack = vec![Open { fixings: Vec::new(), bound: root_obj, solved: Some((root_x, root_obj)) }];
        while self.incumbent.is_none() && self.limit_reached().is_none() {
            let Some(node) = stack.pop() else { break };
            let (x, obj) = match node.solved {
                Some(s) => s,
                None => match self.solve_node(&node.fixings)? {
                    LpOutcome::Optimal { x, objective } => (x, objective),
                    LpOutcome::Infeasible => continue,
                    LpOutcome::Unbounded => return Err(unbounded_node()),
                },
            };
            match most_fractional(self.p, &x, &node.fixings) {
                None => self.offer(x, obj),
                Some(j) => {
                    let near = if x[j] >= 0.5 { 1.0 } else { 0.0 };
                    for v in [1.0 - near, near] {
                        let mut fixings = node.fixings.clone();
                        fixings.push((j, v));
                        stack.push(Open { fixings, bound: obj, solved: None });
                    }
                }
            }
        }
        for open in stack {
            *seq += 1;
            let depth = open.fixings.len();
            heap.push(Node { bound: open.bound, depth, seq: *seq, fixings: open.fixings });
        }
        Ok(())
    }
}

fn unbounded_node() -> MilpError {
    MilpError::NumericInstability("node relaxation unbounded below a bounded root".into())
}

/// Most fractional binary column not yet fixed; ties go to the lowest index.
fn most_fractional(p: &MilpProblem, x: &[f64], fixings: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..p.num_cols() {
        if !p.binary[j] || fixings.iter().any(|&(c, _)| c == j) {
            continue;
        }
        let frac = (x[j] - x[j].round()).abs();
        if frac > INT_TOL && best.is_none_or(|(_, f)| frac > f) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

fn snap_binaries(p: &MilpProblem, mut x: Vec<f64>) -> Vec<f64> {
    for j in 0..x.len() {
        if p.binary[j] {
            x[j] = x[j].round();
        }
    }
    x
}

/// Solve `p` to within `controls.mip_gap` or until a limit is reached.
pub fn solve_milp(p: &MilpProblem, controls: &SolverControls) -> Result<MilpSolution, MilpError> {
    solve_milp_with_starts(p, controls, &[])
}

/// As [`solve_milp`], trying each of `starts` as a first incumbent.
///
/// Only the binary entries of a start are used: they are fixed and the
/// continuous columns re-solved. Starts that turn out infeasible are ignored.
/// Each start costs one LP, which is not checked against the limits.
pub fn solve_milp_with_starts(p: &MilpProblem, controls: &SolverControls, starts: &[Vec<f64>]) -> Result<MilpSolution, MilpError> {
    p.validate()?;
    if !(controls.mip_gap >= 0.0) {
        return Err(MilpError::InvalidProblem("mip_gap must be nonnegative".into()));
    }
    let n = p.num_cols();
    if let Some(bad) = starts.iter().find(|s| s.len() != n) {
        return Err(MilpError::InvalidProblem(format!("start has {} entries for {n} columns", bad.len())));
    }
    let mut s = Search {
        p,
        controls: *controls,
        start: Instant::now(),
        nodes: 0,
        incumbent: None,
        lower: vec![0.0; n],
        upper: vec![0.0; n],
    };

    let finish = |s: &Search, status: MilpStatus, bound: f64| -> Result<MilpSolution, MilpError> {
        let wall_time_s = s.start.elapsed().as_secs_f64();
        match (&s.incumbent, status) {
            (Some(inc), _) => {
                let bound = bound.min(inc.objective);
                Ok(MilpSolution {
                    status,
                    columns: inc.x.clone(),
                    objective: inc.objective,
                    bound,
                    gap: relative_gap(inc.objective, bound),
                    nodes: s.nodes,
                    wall_time_s,
                })
            }
            (None, MilpStatus::TimeLimit | MilpStatus::NodeLimit) => {
                Err(MilpError::NoIncumbentAtTimeout { nodes: s.nodes, wall_time_s })
            }
            (None, status) => {
                let objective = if status == MilpStatus::Unbounded { f64::NEG_INFINITY } else { f64::INFINITY };
                Ok(MilpSolution {
                    status,
                    columns: vec![0.0; n],
                    objective,
                    bound: objective,
                    gap: f64::INFINITY,
                    nodes: s.nodes,
                    wall_time_s,
                })
            }
        }
    };

    let root = s.solve_node(&[])?;
    let (root_x, root_obj) = match root {
        LpOutcome::Infeasible => return finish(&s, MilpStatus::Infeasible, f64::INFINITY),
        LpOutcome::Unbounded => return finish(&s, MilpStatus::Unbounded, f64::NEG_INFINITY),
        LpOutcome::Optimal { x, objective } => (x, objective),
    };
    if most_fractional(p, &root_x, &[]).is_none() {
        s.offer(root_x, root_obj);
        return finish(&s, MilpStatus::Optimal, root_obj);
    }

    // Starts are always tried, even past a limit.
    for start in starts {
        s.complete(start)?;
    }
    if s.limit_reached().is_none() {
        s.complete(&root_x)?;
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    s.depth_first(root_x, root_obj, &mut heap, &mut seq)?;

    while let Some(node) = heap.pop() {
        if let Some(inc) = &s.incumbent {
            if inc.objective - node.bound <= s.prune_tol(inc.objective) {
                // Best-first: every remaining node is at least this good.
                return finish(&s, MilpStatus::Optimal, node.bound);
            }
        }
        if let Some(status) = s.limit_reached() {
            return finish(&s, status, node.bound);
        }
        let (x, obj) = match s.solve_node(&node.fixings)? {
            LpOutcome::Optimal { x, objective } => (x, objective),
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => return Err(unbounded_node()),
        };
        if let Some(inc) = &s.incumbent {
            if obj >= inc.objective - s.prune_tol(inc.objective) {
                continue;
            }
        }
        match most_fractional(p, &x, &node.fixings) {
            None => s.offer(x, obj),
            Some(j) => {
                let near = if x[j] >= 0.5 { 1.0 } else { 0.0 };
                for v in [1.0 - near, near] {
                    seq += 1;
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, v));
                    heap.push(Node { bound: obj, depth: node.depth + 1, seq, fixings });
                }
            }
        }
    }
    let bound = s.incumbent.as_ref().map_or(f64::INFINITY, |inc| inc.objective);
    let status = if s.incumbent.is_some() { MilpStatus::Optimal } else { MilpStatus::Infeasible };
    finish(&s, status, bound)
}
