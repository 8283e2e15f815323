//! Bounded-variable revised simplex with a dense maintained basis inverse.
//!
//! Every row `lo <= a·x <= hi` is canonicalized to `a·x - s = 0` with the
//! row bounds moved onto the slack `s` (an equality fixes the slack). The
//! initial basis is the slack set; phase 1 drives the sum of basic bound
//! violations to zero, phase 2 maximizes the objective. Pivoting uses the
//! largest improvement rule with index tie-breaks and falls back to Bland's
//! rule after a run of degenerate steps, which keeps the method finite and
//! the result deterministic for identical input.

use super::{LinearProgram, LpSolution, SolveStatus, Tolerances};

const PIVOT_EPS: f64 = 1e-9;
const RATE_EPS: f64 = 1e-9;
const DEGEN_EPS: f64 = 1e-10;
const PHASE1_TARGET: f64 = 1e-9;
const DEGEN_LIMIT: usize = 40;
const REFACTOR_PERIOD: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

struct Worker {
    ncols: usize,
    nrows: usize,
    nstruct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    obj: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Row-major dense basis inverse.
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    pivots_since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
    max_iterations: usize,
}

enum StepOutcome {
    Pivoted,
    BoundFlipped,
    NoEntering,
    Unbounded,
    Stalled,
}

pub(super) fn solve(lp: &LinearProgram, tol: &Tolerances) -> LpSolution {
    let mut w = Worker::new(lp);
    match w.run(tol) {
        Ok(()) => w.extract(lp, tol),
        Err(status) => LpSolution::failed(status),
    }
}

impl Worker {
    fn new(lp: &LinearProgram) -> Self {
        let nstruct = lp.num_variables();
        let nrows = lp.num_rows();
        let ncols = nstruct + nrows;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncols];
        let mut lower = Vec::with_capacity(ncols);
        let mut upper = Vec::with_capacity(ncols);
        let mut obj = vec![0.0; ncols];
        for (j, v) in lp.vars().iter().enumerate() {
            lower.push(v.lower);
            upper.push(v.upper);
            obj[j] = v.objective;
        }
        for (r, row) in lp.rows().iter().enumerate() {
            for &(var, coeff) in &row.terms {
                if coeff != 0.0 {
                    cols[var].push((r, coeff));
                }
            }
            cols[nstruct + r].push((r, -1.0));
            lower.push(row.lower);
            upper.push(row.upper);
        }
        let state = (0..ncols)
            .map(|j| {
                if lower[j].is_finite() {
                    VarState::AtLower
                } else if upper[j].is_finite() {
                    VarState::AtUpper
                } else {
                    VarState::Free
                }
            })
            .collect::<Vec<_>>();
        let mut w = Worker {
            ncols,
            nrows,
            nstruct,
            cols,
            lower,
            upper,
            obj,
            state,
            basis: (0..nrows).map(|r| nstruct + r).collect(),
            binv: vec![0.0; nrows * nrows],
            xb: vec![0.0; nrows],
            iterations: 0,
            pivots_since_refactor: 0,
            degenerate_run: 0,
            bland: false,
            max_iterations: 20_000 + 100 * (nstruct + nrows),
        };
        for r in 0..nrows {
            w.state[nstruct + r] = VarState::Basic(r);
            // Slack columns are -e_r, so the initial basis inverse is -I.
            w.binv[r * nrows + r] = -1.0;
        }
        w.recompute_basics();
        w
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Free => 0.0,
            VarState::Basic(pos) => self.xb[pos],
        }
    }

    /// Recomputes basic values from scratch: B x_B = -N x_N.
    fn recompute_basics(&mut self) {
        let m = self.nrows;
        let mut rhs = vec![0.0; m];
        for j in 0..self.ncols {
            if let VarState::Basic(_) = self.state[j] {
                continue;
            }
            let v = self.nonbasic_value(j);
            if v != 0.0 {
                for &(r, a) in &self.cols[j] {
                    rhs[r] -= a * v;
                }
            }
        }
        for i in 0..m {
            let mut acc = 0.0;
            for r in 0..m {
                acc += self.binv[i * m + r] * rhs[r];
            }
            self.xb[i] = acc;
        }
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination with partial
    /// pivoting. Fails if the basis matrix is numerically singular.
    fn refactorize(&mut self) -> Result<(), SolveStatus> {
        let m = self.nrows;
        if m == 0 {
            return Ok(());
        }
        let mut mat = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            for &(r, a) in &self.cols[j] {
                mat[r * m + pos] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = mat[col * m + col].abs();
            for r in col + 1..m {
                let cand = mat[r * m + col].abs();
                if cand > best {
                    best = cand;
                    piv = r;
                }
            }
            if best < 1e-12 {
                return Err(SolveStatus::NumericalFailure);
            }
            if piv != col {
                for k in 0..m {
                    mat.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let d = mat[col * m + col];
            for k in 0..m {
                mat[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = mat[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            mat[r * m + k] -= f * mat[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        self.recompute_basics();
        Ok(())
    }

    /// w = B^-1 A_j.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.nrows;
        let mut w = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            if a != 0.0 {
                for i in 0..m {
                    w[i] += self.binv[i * m + r] * a;
                }
            }
        }
        w
    }

    /// y = g B^-1 for a per-basic-position cost vector g.
    fn btran(&self, g: &[f64]) -> Vec<f64> {
        let m = self.nrows;
        let mut y = vec![0.0; m];
        for i in 0..m {
            let gi = g[i];
            if gi != 0.0 {
                for r in 0..m {
                    y[r] += gi * self.binv[i * m + r];
                }
            }
        }
        y
    }

    fn infeasibility(&self) -> f64 {
        let mut total = 0.0;
        for (pos, &j) in self.basis.iter().enumerate() {
            let x = self.xb[pos];
            if x < self.lower[j] {
                total += self.lower[j] - x;
            } else if x > self.upper[j] {
                total += x - self.upper[j];
            }
        }
        total
    }

    fn run(&mut self, tol: &Tolerances) -> Result<(), SolveStatus> {
        // Phase 1: minimize the total bound violation of the basic set.
        while self.infeasibility() > PHASE1_TARGET {
            if self.iterations > self.max_iterations {
                return Err(SolveStatus::NumericalFailure);
            }
            let grad = self.phase1_gradient();
            match self.step(&grad, true)? {
                StepOutcome::NoEntering => {
                    // No improving direction left; the residual violation is
                    // genuine infeasibility.
                    if self.infeasibility() > tol.feasibility.max(PHASE1_TARGET) {
                        return Err(SolveStatus::Infeasible);
                    }
                    break;
                }
                StepOutcome::Stalled => return Err(SolveStatus::NumericalFailure),
                StepOutcome::Unbounded => return Err(SolveStatus::NumericalFailure),
                StepOutcome::Pivoted | StepOutcome::BoundFlipped => {}
            }
        }
        self.degenerate_run = 0;
        self.bland = false;
        // Phase 2: maximize the true objective from a feasible basis.
        loop {
            if self.iterations > self.max_iterations {
                return Err(SolveStatus::NumericalFailure);
            }
            let grad: Vec<f64> = self.basis.iter().map(|&j| self.obj[j]).collect();
            match self.step(&grad, false)? {
                StepOutcome::NoEntering => return Ok(()),
                StepOutcome::Unbounded => return Err(SolveStatus::Unbounded),
                StepOutcome::Stalled => return Err(SolveStatus::NumericalFailure),
                StepOutcome::Pivoted | StepOutcome::BoundFlipped => {}
            }
        }
    }

    /// Phase-1 objective gradient per basic position: -1 below the lower
    /// bound, +1 above the upper, 0 when feasible. Minimizing this composite
    /// cost shrinks infeasibility.
    fn phase1_gradient(&self) -> Vec<f64> {
        self.basis
            .iter()
            .enumerate()
            .map(|(pos, &j)| {
                let x = self.xb[pos];
                if x < self.lower[j] - DEGEN_EPS {
                    -1.0
                } else if x > self.upper[j] + DEGEN_EPS {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// One simplex iteration against the given basic cost vector.
    ///
    /// Entering column j moving in direction dir changes the basic set at
    /// rate -dir*(B^-1 A_j). Phase 1 descends the violation gradient, which
    /// means dir*(g B^-1 A_j) must be positive; phase 2 asks for a positive
    /// rate dir*(c_j - y A_j) instead. Both share the sign pattern below.
    fn step(&mut self, grad: &[f64], minimize_grad: bool) -> Result<StepOutcome, SolveStatus> {
        self.iterations += 1;
        let y = self.btran(grad);
        let mut enter: Option<(usize, i8, f64)> = None;
        for j in 0..self.ncols {
            let state = self.state[j];
            if matches!(state, VarState::Basic(_)) {
                continue;
            }
            if self.upper[j] - self.lower[j] <= 0.0 {
                // Fixed variables never re-enter.
                continue;
            }
            let mut q = 0.0;
            for &(r, a) in &self.cols[j] {
                q += y[r] * a;
            }
            let d = if minimize_grad { q } else { self.obj[j] - q };
            let cand: Option<(i8, f64)> = match state {
                VarState::AtLower if d > RATE_EPS => Some((1, d)),
                VarState::AtUpper if d < -RATE_EPS => Some((-1, -d)),
                VarState::Free if d.abs() > RATE_EPS => Some((if d > 0.0 { 1 } else { -1 }, d.abs())),
                _ => None,
            };
            if let Some((dir, rate)) = cand {
                if self.bland {
                    enter = Some((j, dir, rate));
                    break;
                }
                match enter {
                    Some((_, _, best)) if best >= rate => {}
                    _ => enter = Some((j, dir, rate)),
                }
            }
        }
        let Some((j_enter, dir, _)) = enter else {
            return Ok(StepOutcome::NoEntering);
        };
        let dirf = f64::from(dir);
        let w = self.ftran(j_enter);

        // Ratio test: find the first event as the entering variable moves.
        // Basic variables travel at rate -dir*w; in phase 1 an infeasible
        // basic variable blocks when it reaches the bound it violates.
        let mut t_best = f64::INFINITY;
        let mut leave: Option<(usize, VarState, f64)> = None; // (position, exit state, |pivot|)
        for pos in 0..self.nrows {
            let rate = -dirf * w[pos];
            if rate.abs() <= PIVOT_EPS {
                continue;
            }
            let jb = self.basis[pos];
            let x = self.xb[pos];
            let (target, exit_state) = if x < self.lower[jb] - DEGEN_EPS {
                if rate > 0.0 {
                    (self.lower[jb], VarState::AtLower)
                } else {
                    continue;
                }
            } else if x > self.upper[jb] + DEGEN_EPS {
                if rate < 0.0 {
                    (self.upper[jb], VarState::AtUpper)
                } else {
                    continue;
                }
            } else if rate > 0.0 {
                if self.upper[jb].is_finite() {
                    (self.upper[jb], VarState::AtUpper)
                } else {
                    continue;
                }
            } else if self.lower[jb].is_finite() {
                (self.lower[jb], VarState::AtLower)
            } else {
                continue;
            };
            let t = ((target - x) / rate).max(0.0);
            let better = if self.bland {
                // Bland: smallest leaving variable index among the ties.
                t < t_best - DEGEN_EPS
                    || (t < t_best + DEGEN_EPS
                        && leave.as_ref().is_none_or(|&(p, _, _)| jb < self.basis[p]))
            } else {
                t < t_best - DEGEN_EPS
                    || (t < t_best + DEGEN_EPS
                        && leave.as_ref().is_none_or(|&(_, _, piv)| w[pos].abs() > piv))
            };
            if better {
                t_best = t.min(t_best);
                leave = Some((pos, exit_state, w[pos].abs()));
            }
        }

        // The entering variable's own opposite bound competes as well, but a
        // basic leave is preferred on exact ties.
        let span = match self.state[j_enter] {
            VarState::AtLower => self.upper[j_enter] - self.lower[j_enter],
            VarState::AtUpper => self.upper[j_enter] - self.lower[j_enter],
            _ => f64::INFINITY,
        };
        let flip = span.is_finite() && span < t_best - DEGEN_EPS;

        if flip {
            let t = span;
            for pos in 0..self.nrows {
                self.xb[pos] += t * (-dirf * w[pos]);
            }
            self.state[j_enter] = match self.state[j_enter] {
                VarState::AtLower => VarState::AtUpper,
                VarState::AtUpper => VarState::AtLower,
                other => other,
            };
            self.note_step_length(t);
            return Ok(StepOutcome::BoundFlipped);
        }

        let Some((pos, exit_state, pivot_abs)) = leave else {
            if span.is_finite() {
                // No basic block but the entering variable itself is bounded.
                let t = span;
                for p in 0..self.nrows {
                    self.xb[p] += t * (-dirf * w[p]);
                }
                self.state[j_enter] = match self.state[j_enter] {
                    VarState::AtLower => VarState::AtUpper,
                    VarState::AtUpper => VarState::AtLower,
                    other => other,
                };
                self.note_step_length(t);
                return Ok(StepOutcome::BoundFlipped);
            }
            return Ok(if minimize_grad {
                // Phase-1 infeasibility is bounded below; an unbounded ray
                // here means the arithmetic has broken down.
                StepOutcome::Stalled
            } else {
                StepOutcome::Unbounded
            });
        };

        if pivot_abs < PIVOT_EPS {
            // Unusably small pivot: refactorize and let the caller retry.
            self.refactorize()?;
            return Ok(StepOutcome::BoundFlipped);
        }

        let t = t_best;
        let enter_start = self.nonbasic_value(j_enter);
        for p in 0..self.nrows {
            self.xb[p] += t * (-dirf * w[p]);
        }
        let j_leave = self.basis[pos];
        self.state[j_leave] = exit_state;
        self.basis[pos] = j_enter;
        self.state[j_enter] = VarState::Basic(pos);
        self.xb[pos] = enter_start + dirf * t;
        self.update_binv(pos, &w);
        self.note_step_length(t);
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_PERIOD {
            self.refactorize()?;
        }
        Ok(StepOutcome::Pivoted)
    }

    fn note_step_length(&mut self, t: f64) {
        if t > DEGEN_EPS {
            self.degenerate_run = 0;
            self.bland = false;
        } else {
            self.degenerate_run += 1;
            if self.degenerate_run > DEGEN_LIMIT {
                self.bland = true;
            }
        }
    }

    /// Elementary row update of the basis inverse after the column with
    /// tableau representation `w` replaces the basic variable at `pos`.
    fn update_binv(&mut self, pos: usize, w: &[f64]) {
        let m = self.nrows;
        let piv = w[pos];
        for k in 0..m {
            self.binv[pos * m + k] /= piv;
        }
        for i in 0..m {
            if i != pos {
                let f = w[i];
                if f != 0.0 {
                    for k in 0..m {
                        self.binv[i * m + k] -= f * self.binv[pos * m + k];
                    }
                }
            }
        }
    }

    fn current_values(&self) -> Vec<f64> {
        (0..self.ncols).map(|j| self.nonbasic_value(j)).collect()
    }

    fn duals(&self) -> Vec<f64> {
        let grad: Vec<f64> = self.basis.iter().map(|&j| self.obj[j]).collect();
        self.btran(&grad)
    }

    fn extract(&mut self, lp: &LinearProgram, tol: &Tolerances) -> LpSolution {
        // Clean pass: refactorize once so the reported numbers come from a
        // fresh inverse, then verify the optimality certificates.
        for attempt in 0..3 {
            if self.refactorize().is_err() {
                return LpSolution::failed(SolveStatus::NumericalFailure);
            }
            if attempt > 0 {
                // Feasibility may have drifted; polish with more pivots.
                self.bland = true;
                if self.run(tol).is_err() {
                    return LpSolution::failed(SolveStatus::NumericalFailure);
                }
                if self.refactorize().is_err() {
                    return LpSolution::failed(SolveStatus::NumericalFailure);
                }
            }
            let x = self.current_values();
            let y = self.duals();
            let objective: f64 = (0..self.nstruct).map(|j| self.obj[j] * x[j]).sum();

            let mut row_activity = vec![0.0; self.nrows];
            for j in 0..self.ncols {
                if x[j] != 0.0 {
                    for &(r, a) in &self.cols[j] {
                        row_activity[r] += a * x[j];
                    }
                }
            }
            let mut primal_residual = row_activity.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for j in 0..self.ncols {
                if self.lower[j].is_finite() {
                    primal_residual = primal_residual.max(self.lower[j] - x[j]);
                }
                if self.upper[j].is_finite() {
                    primal_residual = primal_residual.max(x[j] - self.upper[j]);
                }
            }

            let mut gap = 0.0f64;
            let mut worst_cs = 0.0f64;
            let mut reduced = vec![0.0; self.ncols];
            let mut dual_ok = true;
            for j in 0..self.ncols {
                let mut q = 0.0;
                for &(r, a) in &self.cols[j] {
                    q += y[r] * a;
                }
                let d = self.obj[j] - q;
                reduced[j] = d;
                let defect = if d > 0.0 {
                    if self.upper[j].is_finite() {
                        d * (self.upper[j] - x[j])
                    } else if d > RATE_EPS {
                        dual_ok = false;
                        0.0
                    } else {
                        0.0
                    }
                } else if d < 0.0 {
                    if self.lower[j].is_finite() {
                        -d * (x[j] - self.lower[j])
                    } else if d < -RATE_EPS {
                        dual_ok = false;
                        0.0
                    } else {
                        0.0
                    }
                } else {
                    0.0
                };
                gap += defect.abs();
                worst_cs = worst_cs.max(defect.abs());
            }

            let scale = 1.0 + objective.abs();
            if dual_ok
                && primal_residual <= tol.feasibility
                && gap <= tol.gap * scale
                && worst_cs <= tol.complementarity * scale
            {
                return LpSolution {
                    status: SolveStatus::Optimal,
                    objective,
                    primal: x[..self.nstruct].to_vec(),
                    duals: y,
                    reduced_costs: reduced[..self.nstruct].to_vec(),
                    iterations: self.iterations,
                    primal_residual,
                    duality_gap: gap,
                    complementarity_residual: worst_cs,
                };
            }
        }
        let _ = lp;
        LpSolution::failed(SolveStatus::NumericalFailure)
    }
}

#[cfg(test)]
mod tests {
    use crate::lpsolve::{LinearProgram, SolveStatus, Tolerances};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn maximize_single_bounded_variable() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, 1.0, 1.0).unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert_eq!(sol.value(x), 1.0);
        assert_eq!(sol.reduced_cost(x), 1.0);
        assert_eq!(sol.objective, 1.0);
    }

    #[test]
    fn two_variable_equality_picks_valuable_block() {
        let mut lp = LinearProgram::new("t");
        let a = lp.add_variable("a", 0.0, 3.0, 4.0).unwrap();
        let b = lp.add_variable("b", 0.0, 3.0, 10.0).unwrap();
        let r = lp.add_equality("sum", &[(a, 1.0), (b, 1.0)], 3.0).unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert!((sol.value(a) - 0.0).abs() < 1e-9);
        assert!((sol.value(b) - 3.0).abs() < 1e-9);
        assert!((sol.dual(r) - 10.0).abs() < 1e-9, "dual {}", sol.dual(r));
        assert!((sol.objective - 30.0).abs() < 1e-9);
    }

    #[test]
    fn equality_dual_measures_rhs_sensitivity() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, 10.0, 1.0).unwrap();
        let r = lp.add_equality("fix", &[(x, 1.0)], 5.0).unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert!((sol.value(x) - 5.0).abs() < 1e-9);
        assert!((sol.dual(r) - 1.0).abs() < 1e-9);

        let mut lp2 = LinearProgram::new("t2");
        let x2 = lp2.add_variable("x", 0.0, 10.0, -1.0).unwrap();
        let r2 = lp2.add_equality("fix", &[(x2, 1.0)], 5.0).unwrap();
        let sol2 = lp2.solve(&tol());
        assert!(sol2.is_optimal());
        assert!((sol2.dual(r2) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn range_row_binds_at_upper() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, 100.0, 2.0).unwrap();
        let y = lp.add_variable("y", 0.0, 100.0, 3.0).unwrap();
        let r = lp
            .add_range("cap", &[(x, 1.0), (y, 1.0)], -10.0, 10.0)
            .unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert!((sol.objective - 30.0).abs() < 1e-9);
        assert!((sol.value(y) - 10.0).abs() < 1e-9);
        // Raising the cap admits one more unit of the better variable.
        assert!((sol.dual(r) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn free_variables_settle_on_equalities() {
        let mut lp = LinearProgram::new("t");
        let x = lp
            .add_variable("x", f64::NEG_INFINITY, f64::INFINITY, -1.0)
            .unwrap();
        let y = lp
            .add_variable("y", f64::NEG_INFINITY, f64::INFINITY, -2.0)
            .unwrap();
        lp.add_equality("r1", &[(x, 1.0), (y, 1.0)], 4.0).unwrap();
        lp.add_equality("r2", &[(x, 1.0), (y, -1.0)], 2.0).unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert!((sol.value(x) - 3.0).abs() < 1e-9);
        assert!((sol.value(y) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_bounds_vs_row() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, 1.0, 1.0).unwrap();
        lp.add_equality("too-big", &[(x, 1.0)], 5.0).unwrap();
        let sol = lp.solve(&tol());
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn conflicting_rows_are_infeasible() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", -10.0, 10.0, 0.0).unwrap();
        let y = lp.add_variable("y", -10.0, 10.0, 1.0).unwrap();
        lp.add_equality("r1", &[(x, 1.0), (y, 1.0)], 3.0).unwrap();
        lp.add_equality("r2", &[(x, 1.0), (y, 1.0)], 4.0).unwrap();
        let sol = lp.solve(&tol());
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_free_objective() {
        let mut lp = LinearProgram::new("t");
        lp.add_variable("x", 0.0, f64::INFINITY, 1.0).unwrap();
        let sol = lp.solve(&tol());
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn unbounded_along_row_ray() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, f64::INFINITY, 1.0).unwrap();
        let y = lp.add_variable("y", 0.0, f64::INFINITY, 0.0).unwrap();
        lp.add_equality("tie", &[(x, 1.0), (y, -1.0)], 0.0).unwrap();
        let sol = lp.solve(&tol());
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn no_rows_no_finite_bound_detected() {
        let mut lp = LinearProgram::new("t");
        lp.add_variable("x", f64::NEG_INFINITY, f64::INFINITY, 2.0)
            .unwrap();
        let sol = lp.solve(&tol());
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn fixed_variable_is_respected() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 2.5, 2.5, -3.0).unwrap();
        let y = lp.add_variable("y", 0.0, 10.0, 1.0).unwrap();
        let r = lp.add_range("cap", &[(x, 1.0), (y, 1.0)], 0.0, 6.0).unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert_eq!(sol.value(x), 2.5);
        assert!((sol.value(y) - 3.5).abs() < 1e-9);
        let _ = r;
    }

    #[test]
    fn determinism_identical_runs() {
        let mut lp = LinearProgram::new("t");
        let a = lp.add_variable("a", 0.0, 5.0, 3.0).unwrap();
        let b = lp.add_variable("b", 0.0, 5.0, 3.0).unwrap();
        let c = lp.add_variable("c", -2.0, 2.0, 1.0).unwrap();
        lp.add_range("r1", &[(a, 1.0), (b, 2.0), (c, 1.0)], -4.0, 8.0)
            .unwrap();
        lp.add_equality("r2", &[(a, 1.0), (b, -1.0)], 1.0).unwrap();
        let s1 = lp.solve(&tol());
        let s2 = lp.solve(&tol());
        assert!(s1.is_optimal());
        assert_eq!(s1, s2);
    }

    #[test]
    fn objective_scaling_scales_duals() {
        let build = |k: f64| {
            let mut lp = LinearProgram::new("t");
            let a = lp.add_variable("a", 0.0, 3.0, 4.0 * k).unwrap();
            let b = lp.add_variable("b", 0.0, 3.0, 10.0 * k).unwrap();
            let r = lp.add_equality("sum", &[(a, 1.0), (b, 1.0)], 3.0).unwrap();
            (lp, a, b, r)
        };
        let (lp1, a1, b1, r1) = build(1.0);
        let (lp7, a7, b7, r7) = build(7.0);
        let s1 = lp1.solve(&tol());
        let s7 = lp7.solve(&tol());
        assert!(s1.is_optimal() && s7.is_optimal());
        assert_eq!(s1.value(a1), s7.value(a7));
        assert_eq!(s1.value(b1), s7.value(b7));
        assert!((s7.dual(r7) - 7.0 * s1.dual(r1)).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cap_layers_terminate() {
        // Multiple redundant caps through the same point force degenerate
        // pivots; the Bland fallback must still terminate at the optimum.
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, 10.0, 1.0).unwrap();
        let y = lp.add_variable("y", 0.0, 10.0, 1.0).unwrap();
        lp.add_range("c1", &[(x, 1.0), (y, 1.0)], f64::NEG_INFINITY, 4.0)
            .unwrap();
        lp.add_range("c2", &[(x, 2.0), (y, 2.0)], f64::NEG_INFINITY, 8.0)
            .unwrap();
        lp.add_range("c3", &[(x, 1.0), (y, 2.0)], f64::NEG_INFINITY, 7.0)
            .unwrap();
        lp.add_range("c4", &[(x, 2.0), (y, 1.0)], f64::NEG_INFINITY, 7.0)
            .unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert!((sol.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn certificates_within_tolerances() {
        let mut lp = LinearProgram::new("t");
        let a = lp.add_variable("a", 0.0, 2.0, 5.0).unwrap();
        let b = lp.add_variable("b", -1.0, 4.0, -2.0).unwrap();
        let c = lp.add_variable("c", 0.0, 6.0, 1.0).unwrap();
        lp.add_range("r1", &[(a, 1.0), (b, 1.0), (c, 1.0)], 0.0, 5.0)
            .unwrap();
        lp.add_equality("r2", &[(b, 1.0), (c, 1.0)], 2.0).unwrap();
        let sol = lp.solve(&tol());
        assert!(sol.is_optimal());
        assert!(sol.primal_residual <= 1e-7);
        assert!(sol.duality_gap <= 1e-6 * (1.0 + sol.objective.abs()));
        assert!(sol.complementarity_residual <= 1e-6 * (1.0 + sol.objective.abs()));
    }
}
