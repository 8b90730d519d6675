//! Two-phase bounded-variable primal simplex on a dense tableau.
//!
//! Every row `a·x ⋚ b` gets a slack `s` with `a·x + s = b`; the sense is carried
//! by the slack's bounds. Rows whose slack cannot start basic and feasible get
//! an artificial column, and phase one minimises the sum of artificials.
//! Pricing is Dantzig with a Harris ratio test; after a run of degenerate
//! pivots it switches to Bland's rule until progress resumes.

use std::time::Instant;

use super::{MilpError, MilpProblem, MilpSolution, MilpStatus, Sense, FEAS_TOL};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

/// Solve the LP relaxation (binaries relaxed to their bounds).
pub fn solve_lp(p: &MilpProblem) -> Result<MilpSolution, MilpError> {
    p.validate()?;
    let start = Instant::now();
    let out = solve_relaxation(p, &p.lower, &p.upper)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    Ok(match out {
        LpOutcome::Optimal { x, objective } => MilpSolution {
            status: MilpStatus::Optimal,
            columns: x,
            objective,
            bound: objective,
            gap: 0.0,
            nodes: 1,
            wall_time_s,
        },
        LpOutcome::Infeasible => empty(MilpStatus::Infeasible, p.num_cols(), f64::INFINITY, wall_time_s),
        LpOutcome::Unbounded => empty(MilpStatus::Unbounded, p.num_cols(), f64::NEG_INFINITY, wall_time_s),
    })
}

fn empty(status: MilpStatus, n: usize, objective: f64, wall_time_s: f64) -> MilpSolution {
    MilpSolution { status, columns: vec![0.0; n], objective, bound: objective, gap: f64::INFINITY, nodes: 1, wall_time_s }
}

/// Solve the LP of `p` with the given column bounds in place of `p`'s own.
pub(crate) fn solve_relaxation(p: &MilpProblem, lower: &[f64], upper: &[f64]) -> Result<LpOutcome, MilpError> {
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Ok(LpOutcome::Infeasible);
    }
    let mut tab = Tableau::new(p, lower, upper);
    if tab.num_art > 0 {
        tab.set_phase_one_costs();
        match tab.iterate()? {
            Step::Optimal => {}
            Step::Unbounded => {
                return Err(MilpError::NumericInstability("phase one reported unbounded".into()));
            }
        }
        let infeasibility: f64 = (tab.n + tab.m..tab.ncol).map(|j| tab.x[j]).sum();
        if infeasibility > FEAS_TOL * (1.0 + tab.rhs_scale) {
            return Ok(LpOutcome::Infeasible);
        }
        tab.retire_artificials();
    }
    tab.set_costs(&p.objective);
    match tab.iterate()? {
        Step::Optimal => {}
        Step::Unbounded => return Ok(LpOutcome::Unbounded),
    }
    let mut x = tab.x[..tab.n].to_vec();
    for (j, v) in x.iter_mut().enumerate() {
        // Snap values that sit within tolerance of a bound.
        if (*v - lower[j]).abs() <= FEAS_TOL * 1e-2 {
            *v = lower[j];
        } else if (*v - upper[j]).abs() <= FEAS_TOL * 1e-2 {
            *v = upper[j];
        }
    }
    let check = MilpProblem { lower: lower.to_vec(), upper: upper.to_vec(), ..p.clone_shallow() };
    let viol = check.max_violation(&x);
    if viol > 1e-6 * (1.0 + tab.rhs_scale) {
        return Err(MilpError::NumericInstability(format!("final primal violation {viol:e}")));
    }
    let objective = p.objective_value(&x);
    Ok(LpOutcome::Optimal { x, objective })
}

impl MilpProblem {
    /// Copy of the rows and objective; used for residual checks with other bounds.
    fn clone_shallow(&self) -> MilpProblem {
        MilpProblem {
            objective: self.objective.clone(),
            lower: Vec::new(),
            upper: Vec::new(),
            binary: self.binary.clone(),
            rows: self.rows.clone(),
        }
    }
}

enum Step {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// Structural columns.
    n: usize,
    m: usize,
    num_art: usize,
    ncol: usize,
    /// Row-major `m × ncol`, always equal to `B⁻¹·[A | I | art]`.
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    cost: Vec<f64>,
    /// Reduced costs.
    d: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    rhs_scale: f64,
    scratch: Vec<(usize, f64)>,
}

impl Tableau {
    fn new(p: &MilpProblem, lower: &[f64], upper: &[f64]) -> Self {
        let n = p.num_cols();
        let m = p.num_rows();
        let mut x: Vec<f64> = (0..n)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();

        // Residual each slack would have to absorb.
        let mut resid = Vec::with_capacity(m);
        let mut rhs_scale: f64 = 0.0;
        for row in &p.rows {
            let ax: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            resid.push(row.rhs - ax);
            rhs_scale = rhs_scale.max(row.rhs.abs());
        }

        let mut slack_lo = Vec::with_capacity(m);
        let mut slack_hi = Vec::with_capacity(m);
        for row in &p.rows {
            let (l, h) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            slack_lo.push(l);
            slack_hi.push(h);
        }

        // Which rows need an artificial, and its sign.
        let mut art_sign = vec![0.0; m];
        let mut num_art = 0;
        for i in 0..m {
            let r = resid[i];
            if r < slack_lo[i] - FEAS_TOL * 1e-3 || r > slack_hi[i] + FEAS_TOL * 1e-3 {
                let s = r.clamp(slack_lo[i], slack_hi[i]);
                art_sign[i] = if r - s >= 0.0 { 1.0 } else { -1.0 };
                num_art += 1;
            }
        }

        let ncol = n + m + num_art;
        let mut t = vec![0.0; m * ncol];
        let mut lo = Vec::with_capacity(ncol);
        let mut hi = Vec::with_capacity(ncol);
        lo.extend_from_slice(lower);
        hi.extend_from_slice(upper);
        lo.extend_from_slice(&slack_lo);
        hi.extend_from_slice(&slack_hi);
        lo.extend(std::iter::repeat_n(0.0, num_art));
        hi.extend(std::iter::repeat_n(f64::INFINITY, num_art));
        x.resize(ncol, 0.0);

        let mut basis = vec![0; m];
        let mut is_basic = vec![false; ncol];
        let mut next_art = n + m;
        for (i, row) in p.rows.iter().enumerate() {
            let base = i * ncol;
            if art_sign[i] == 0.0 {
                for &(j, a) in &row.coeffs {
                    t[base + j] += a;
                }
                t[base + n + i] = 1.0;
                basis[i] = n + i;
                x[n + i] = resid[i];
            } else {
                // Divide the row by the artificial's coefficient so its column is a unit vector.
                let sgn = art_sign[i];
                for &(j, a) in &row.coeffs {
                    t[base + j] += a * sgn;
                }
                t[base + n + i] = sgn;
                t[base + next_art] = 1.0;
                let s = resid[i].clamp(slack_lo[i], slack_hi[i]);
                x[n + i] = s;
                x[next_art] = (resid[i] - s) * sgn;
                basis[i] = next_art;
                next_art += 1;
            }
            is_basic[basis[i]] = true;
        }

        Self {
            n,
            m,
            num_art,
            ncol,
            t,
            lo,
            hi,
            x,
            cost: vec![0.0; ncol],
            d: vec![0.0; ncol],
            basis,
            is_basic,
            rhs_scale,
            scratch: Vec::new(),
        }
    }

    fn set_phase_one_costs(&mut self) {
        let mut c = vec![0.0; self.ncol];
        for v in &mut c[self.n + self.m..] {
            *v = 1.0;
        }
        self.cost = c;
        self.recompute_reduced_costs();
    }

    fn set_costs(&mut self, objective: &[f64]) {
        let mut c = vec![0.0; self.ncol];
        c[..self.n].copy_from_slice(objective);
        self.cost = c;
        self.recompute_reduced_costs();
    }

    fn recompute_reduced_costs(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.ncol..(i + 1) * self.ncol];
                for (dj, a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// Fix artificials at zero and pivot basic ones out where possible.
    fn retire_artificials(&mut self) {
        let first_art = self.n + self.m;
        for j in first_art..self.ncol {
            self.hi[j] = 0.0;
            if !self.is_basic[j] {
                self.x[j] = 0.0;
            }
        }
        for r in 0..self.m {
            if self.basis[r] < first_art {
                continue;
            }
            let row = &self.t[r * self.ncol..(r + 1) * self.ncol];
            let mut best: Option<(usize, f64)> = None;
            for j in 0..first_art {
                if self.is_basic[j] || self.lo[j] == self.hi[j] {
                    continue;
                }
                let a = row[j].abs();
                if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((q, _)) = best {
                // Degenerate exchange: the artificial is at zero, so values do not move.
                let leaving = self.basis[r];
                self.pivot(r, q);
                self.x[leaving] = 0.0;
            }
        }
    }

    fn entering_direction(&self, j: usize) -> Option<f64> {
        if self.is_basic[j] || self.lo[j] == self.hi[j] {
            return None;
        }
        let dj = self.d[j];
        let xj = self.x[j];
        let at_lower = xj <= self.lo[j];
        let at_upper = xj >= self.hi[j];
        if dj < -OPT_TOL && !at_upper {
            Some(1.0)
        } else if dj > OPT_TOL && !at_lower {
            Some(-1.0)
        } else {
            None
        }
    }

    fn iterate(&mut self) -> Result<Step, MilpError> {
        let max_iter = 50_000 + 50 * (self.m + self.ncol);
        let mut degenerate = 0usize;
        let mut bland = false;
        for _ in 0..max_iter {
            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.ncol {
                if let Some(dir) = self.entering_direction(j) {
                    if bland {
                        entering = Some((j, dir));
                        break;
                    }
                    let score = self.d[j].abs();
                    if score > best {
                        best = score;
                        entering = Some((j, dir));
                    }
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(Step::Optimal);
            };

            // Ratio test.
            let flip = self.hi[q] - self.lo[q];
            let (row, theta) = if bland { self.ratio_textbook(q, dir) } else { self.ratio_harris(q, dir) };
            let (leave_row, theta) = match row {
                Some(r) if theta <= flip => (Some(r), theta),
                _ if flip.is_finite() => (None, flip),
                Some(r) => (Some(r), theta),
                None => return Ok(Step::Unbounded),
            };

            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            // Move basic values along the edge.
            if theta > 0.0 {
                for i in 0..self.m {
                    let a = self.t[i * self.ncol + q];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= dir * a * theta;
                    }
                }
            }
            match leave_row {
                None => {
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some(r) => {
                    let leaving = self.basis[r];
                    let rate = -dir * self.t[r * self.ncol + q];
                    self.x[q] += dir * theta;
                    self.x[leaving] = if rate < 0.0 { self.lo[leaving] } else { self.hi[leaving] };
                    self.pivot(r, q);
                }
            }
        }
        Err(MilpError::NumericInstability(format!("simplex iteration limit ({max_iter}) reached")))
    }

    /// Smallest ratio, ties to the lowest basic column.
    fn ratio_textbook(&self, q: usize, dir: f64) -> (Option<usize>, f64) {
        let mut best: Option<usize> = None;
        let mut best_theta = f64::INFINITY;
        for i in 0..self.m {
            let a = self.t[i * self.ncol + q];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let Some(ratio) = self.row_ratio(i, -dir * a, 0.0) else { continue };
            let better = match best {
                None => true,
                Some(b) => ratio < best_theta - 1e-12 || (ratio <= best_theta + 1e-12 && self.basis[i] < self.basis[b]),
            };
            if better {
                best = Some(i);
                best_theta = ratio;
            }
        }
        (best, best_theta.max(0.0))
    }

    /// Harris two-pass ratio test: bound the step with relaxed bounds, then pick
    /// the largest pivot among rows that block within that step.
    fn ratio_harris(&self, q: usize, dir: f64) -> (Option<usize>, f64) {
        let mut theta_max = f64::INFINITY;
        for i in 0..self.m {
            let a = self.t[i * self.ncol + q];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            if let Some(r) = self.row_ratio(i, -dir * a, FEAS_TOL) {
                theta_max = theta_max.min(r);
            }
        }
        if !theta_max.is_finite() {
            return (None, f64::INFINITY);
        }
        let mut best: Option<usize> = None;
        let mut best_pivot = 0.0;
        for i in 0..self.m {
            let a = self.t[i * self.ncol + q];
            if a.abs() < PIVOT_TOL {
                continue;
            }
            if let Some(r) = self.row_ratio(i, -dir * a, 0.0) {
                if r <= theta_max && a.abs() > best_pivot {
                    best_pivot = a.abs();
                    best = Some(i);
                }
            }
        }
        match best {
            Some(i) => {
                let a = self.t[i * self.ncol + q];
                (Some(i), self.row_ratio(i, -dir * a, 0.0).unwrap_or(0.0).max(0.0))
            }
            None => (None, f64::INFINITY),
        }
    }

    /// Step length at which basic variable of row `i`, moving at `rate` per unit
    /// step, hits its bound (relaxed by `slack`).
    fn row_ratio(&self, i: usize, rate: f64, slack: f64) -> Option<f64> {
        let b = self.basis[i];
        let xb = self.x[b];
        if rate < 0.0 {
            let l = self.lo[b];
            if l.is_finite() {
                return Some(((xb - l + slack) / -rate).max(0.0));
            }
        } else if rate > 0.0 {
            let h = self.hi[b];
            if h.is_finite() {
                return Some(((h - xb + slack) / rate).max(0.0));
            }
        }
        None
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncol;
        let piv = self.t[r * nc + q];
        let inv = 1.0 / piv;
        self.scratch.clear();
        {
            let row = &mut self.t[r * nc..(r + 1) * nc];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        self.scratch.push((j, *v));
                    }
                }
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (pivot_row, after) = rest.split_at_mut(nc);
        let _ = pivot_row;
        let nz = &self.scratch;
        let update = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for &(j, v) in nz {
                    let nv = row[j] - f * v;
                    row[j] = if nv.abs() < DROP_TOL { 0.0 } else { nv };
                }
                row[q] = 0.0;
            }
        };
        for row in before.chunks_exact_mut(nc) {
            update(row);
        }
        for row in after.chunks_exact_mut(nc) {
            update(row);
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, v) in nz {
                self.d[j] -= f * v;
            }
        }
        self.d[q] = 0.0;

        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }
}
