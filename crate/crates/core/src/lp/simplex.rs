//! Dense revised simplex for `min cᵀy  s.t.  Ay ≥ b` with free `y`.
//!
//! The problem is solved through its dual, `max bᵀu  s.t.  Aᵀu = c, u ≥ 0`,
//! which has only `r = dim(y)` equality rows. The basis is `r×r` regardless of
//! how many inequality rows `A` has, so each pivot costs `O(m·r)` for pricing
//! plus `O(r²)` for the basis-inverse update. The primal solution is read off
//! the optimal simplex multipliers.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    /// Pivot cap; `None` means `10·(m + r)`.
    pub max_pivots: Option<usize>,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-11,
            bland_after: 50,
            max_pivots: None,
            refactor_every: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub status: LpStatus,
    /// Optimal `y`; empty unless `status` is optimal.
    pub y: Vec<f64>,
    /// `cᵀy` at the optimum, `+∞` when infeasible and `−∞` when unbounded.
    pub objective: f64,
    pub iterations: usize,
}

/// Solves `min cᵀy  s.t.  Ay ≥ b` for an `m×r` matrix `A` with `m ≥ r`.
pub fn simplex_core(
    a: &DenseMatrix,
    b: &[f64],
    c: &[f64],
    opts: &SimplexOptions,
) -> Result<SimplexOutcome> {
    let (m, r) = (a.rows(), a.cols());
    if r == 0 || m < r {
        return Err(Error::invalid(format!(
            "simplex needs m >= r >= 1, got m = {m}, r = {r}"
        )));
    }
    if b.len() != m || c.len() != r {
        return Err(Error::invalid("right-hand side or objective has the wrong length"));
    }
    if !a.is_finite() || b.iter().chain(c).any(|v| !v.is_finite()) {
        return Err(Error::invalid("LP data must be finite"));
    }

    let scaled = Scaled::new(a, b, c);
    let max_pivots = opts.max_pivots.unwrap_or(10 * (m + r));
    let mut budget = PivotBudget {
        used: 0,
        max: max_pivots,
    };

    let mut dual = DualTableau::new(&scaled.a, &scaled.c, opts);
    let infeasibility = dual.phase_one(&mut budget)?;
    let tol = opts.feasibility_tol * scaled.c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if infeasibility > tol {
        // Dual infeasible: the primal is infeasible or unbounded. Decide with
        // the Farkas system max bᵀu s.t. Aᵀu = 0, u ≥ 0, which is unbounded
        // exactly when Ay ≥ b has no solution.
        let zero = vec![0.0; r];
        let mut farkas = DualTableau::new(&scaled.a, &zero, opts);
        farkas.phase_one(&mut budget)?;
        farkas.drive_out_artificials();
        let status = match farkas.phase_two(&scaled.b, &mut budget)? {
            Phase::Unbounded => LpStatus::Infeasible,
            Phase::Optimal => LpStatus::Unbounded,
        };
        return Ok(terminal(status, budget.used));
    }

    dual.drive_out_artificials();
    match dual.phase_two(&scaled.b, &mut budget)? {
        Phase::Unbounded => Ok(terminal(LpStatus::Infeasible, budget.used)),
        Phase::Optimal => {
            let y_scaled = dual.primal_solution(&scaled.b);
            let y: Vec<f64> = y_scaled
                .iter()
                .zip(&scaled.col_scale)
                .map(|(v, s)| v * s)
                .collect();
            let objective = c.iter().zip(&y).map(|(a, b)| a * b).sum();
            Ok(SimplexOutcome {
                status: LpStatus::Optimal,
                y,
                objective,
                iterations: budget.used,
            })
        }
    }
}

fn terminal(status: LpStatus, iterations: usize) -> SimplexOutcome {
    let objective = match status {
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => f64::NEG_INFINITY,
        LpStatus::Optimal => unreachable!(),
    };
    SimplexOutcome {
        status,
        y: Vec::new(),
        objective,
        iterations,
    }
}

/// Row- then column-equilibrated copy: `A' = R·A·C`, `b' = R·b`, `c' = C·c`,
/// so that `y = C·y'`.
struct Scaled {
    a: DenseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    col_scale: Vec<f64>,
}

impl Scaled {
    fn new(a: &DenseMatrix, b: &[f64], c: &[f64]) -> Self {
        let (m, r) = (a.rows(), a.cols());
        let mut sa = a.clone();
        let mut sb = b.to_vec();
        for j in 0..m {
            let mx = sa.row(j).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if mx > 0.0 {
                sa.row_mut(j).iter_mut().for_each(|v| *v /= mx);
                sb[j] /= mx;
            }
        }
        let mut col_scale = vec![1.0; r];
        for (t, cs) in col_scale.iter_mut().enumerate() {
            let mx = (0..m).fold(0.0f64, |acc, j| acc.max(sa.get(j, t).abs()));
            if mx > 0.0 {
                *cs = 1.0 / mx;
            }
        }
        let sa = sa.scale_columns(&col_scale);
        let sc = c.iter().zip(&col_scale).map(|(v, s)| v * s).collect();
        Scaled {
            a: sa,
            b: sb,
            c: sc,
            col_scale,
        }
    }
}

struct PivotBudget {
    used: usize,
    max: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

/// Standard-form tableau for `Gu = rhs, u ≥ 0` where `G = Aᵀ`; variables
/// `0..m` are the structural `u`, `m..m+r` are artificials `sign_t·e_t`.
struct DualTableau<'a> {
    a: &'a DenseMatrix,
    rhs: Vec<f64>,
    art_sign: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: DenseMatrix,
    x_b: Vec<f64>,
    since_refactor: usize,
    opts: SimplexOptions,
}

impl<'a> DualTableau<'a> {
    fn new(a: &'a DenseMatrix, rhs: &[f64], opts: &SimplexOptions) -> Self {
        let (m, r) = (a.rows(), a.cols());
        let art_sign: Vec<f64> = rhs.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let basis: Vec<usize> = (m..m + r).collect();
        let mut is_basic = vec![false; m + r];
        for &v in &basis {
            is_basic[v] = true;
        }
        DualTableau {
            a,
            rhs: rhs.to_vec(),
            binv: DenseMatrix::from_diag(&art_sign),
            x_b: rhs.iter().map(|v| v.abs()).collect(),
            art_sign,
            basis,
            is_basic,
            since_refactor: 0,
            opts: *opts,
        }
    }

    fn m(&self) -> usize {
        self.a.rows()
    }

    fn r(&self) -> usize {
        self.a.cols()
    }

    fn is_artificial(&self, var: usize) -> bool {
        var >= self.m()
    }

    fn column(&self, var: usize) -> Vec<f64> {
        if var < self.m() {
            self.a.row(var).to_vec()
        } else {
            let t = var - self.m();
            let mut e = vec![0.0; self.r()];
            e[t] = self.art_sign[t];
            e
        }
    }

    /// `π·col(var)` without allocating for structural columns.
    fn dot_column(&self, pi: &[f64], var: usize) -> f64 {
        if var < self.m() {
            pi.iter().zip(self.a.row(var)).map(|(p, g)| p * g).sum()
        } else {
            let t = var - self.m();
            pi[t] * self.art_sign[t]
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let r = self.r();
        let mut bmat = DenseMatrix::zeros(r, r);
        for (t, &var) in self.basis.iter().enumerate() {
            bmat.set_column(t, &self.column(var));
        }
        self.binv = invert(&bmat).ok_or_else(|| Error::ConvergenceFailure {
            iterations: 0,
            residual: f64::INFINITY,
        })?;
        self.x_b = self.binv.mul_vec(&self.rhs);
        for v in &mut self.x_b {
            if *v < 0.0 && *v > -self.opts.feasibility_tol {
                *v = 0.0;
            }
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn multipliers(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let r = self.r();
        let mut pi = vec![0.0; r];
        for (t, &var) in self.basis.iter().enumerate() {
            let cb = cost(var);
            if cb == 0.0 {
                continue;
            }
            for (p, &v) in pi.iter_mut().zip(self.binv.row(t)) {
                *p += cb * v;
            }
        }
        pi
    }

    /// Minimizes `Σ cost(var)·u_var` over `allowed` entering variables.
    fn optimize(
        &mut self,
        cost: &dyn Fn(usize) -> f64,
        allowed: &dyn Fn(usize) -> bool,
        phase_two: bool,
        budget: &mut PivotBudget,
    ) -> Result<Phase> {
        let total = self.m() + self.r();
        let mut degenerate_streak = 0usize;
        let mut fresh = false;
        loop {
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let bland = degenerate_streak >= self.opts.bland_after;
            let pi = self.multipliers(cost);

            let mut entering: Option<(usize, f64)> = None;
            for var in 0..total {
                if self.is_basic[var] || !allowed(var) {
                    continue;
                }
                let d = cost(var) - self.dot_column(&pi, var);
                if d < -self.opts.optimality_tol {
                    match entering {
                        None => entering = Some((var, d)),
                        Some((_, best)) if !bland && d < best => entering = Some((var, d)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }

            let Some((q, _)) = entering else {
                if fresh || self.since_refactor == 0 {
                    return Ok(Phase::Optimal);
                }
                // Re-price against a fresh factorization before certifying.
                self.refactor()?;
                fresh = true;
                continue;
            };
            fresh = false;

            if budget.used >= budget.max {
                return Err(Error::ConvergenceFailure {
                    iterations: budget.used,
                    residual: f64::NAN,
                });
            }

            let col = self.column(q);
            let d = self.binv.mul_vec(&col);

            let mut leave: Option<(usize, f64)> = None;
            for (t, &dt) in d.iter().enumerate() {
                let ratio = if phase_two
                    && self.is_artificial(self.basis[t])
                    && dt.abs() > self.opts.pivot_tol
                {
                    // Artificials left in the basis must stay at zero.
                    0.0
                } else if dt > self.opts.pivot_tol {
                    self.x_b[t].max(0.0) / dt
                } else {
                    continue;
                };
                leave = match leave {
                    None => Some((t, ratio)),
                    Some((lt, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        let better = if tie {
                            if bland {
                                self.basis[t] < self.basis[lt]
                            } else {
                                dt.abs() > d[lt].abs()
                            }
                        } else {
                            ratio < lr
                        };
                        if better {
                            Some((t, ratio))
                        } else {
                            Some((lt, lr))
                        }
                    }
                };
            }
            let Some((l, step)) = leave else {
                return Ok(Phase::Unbounded);
            };

            budget.used += 1;
            if step <= self.opts.feasibility_tol {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(q, l, &d, step);
        }
    }

    fn pivot(&mut self, entering: usize, l: usize, d: &[f64], step: f64) {
        let r = self.r();
        for t in 0..r {
            if t != l {
                self.x_b[t] -= step * d[t];
                if self.x_b[t] < 0.0 && self.x_b[t] > -self.opts.feasibility_tol {
                    self.x_b[t] = 0.0;
                }
            }
        }
        self.x_b[l] = step;

        let dl = d[l];
        let pivot_row: Vec<f64> = self.binv.row(l).iter().map(|v| v / dl).collect();
        for t in 0..r {
            if t == l || d[t] == 0.0 {
                continue;
            }
            let f = d[t];
            for (x, p) in self.binv.row_mut(t).iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
        self.binv.row_mut(l).copy_from_slice(&pivot_row);

        let leaving = self.basis[l];
        self.is_basic[leaving] = false;
        self.is_basic[entering] = true;
        self.basis[l] = entering;
        self.since_refactor += 1;
    }

    /// Minimizes the sum of artificials; returns the remaining infeasibility.
    fn phase_one(&mut self, budget: &mut PivotBudget) -> Result<f64> {
        let m = self.m();
        let cost = move |var: usize| if var >= m { 1.0 } else { 0.0 };
        self.optimize(&cost, &|_| true, false, budget)?;
        self.refactor()?;
        Ok(self
            .basis
            .iter()
            .zip(&self.x_b)
            .filter(|(&var, _)| var >= m)
            .map(|(_, &v)| v.abs())
            .sum())
    }

    /// Swaps zero-level basic artificials for structural columns where
    /// possible; rows with no structural replacement are redundant.
    fn drive_out_artificials(&mut self) {
        let m = self.m();
        for l in 0..self.r() {
            if self.basis[l] < m {
                continue;
            }
            let row: Vec<f64> = self.binv.row(l).to_vec();
            let mut best: Option<(usize, f64)> = None;
            for var in 0..m {
                if self.is_basic[var] {
                    continue;
                }
                let v = self.dot_column(&row, var).abs();
                if v > self.opts.pivot_tol * 1e3 && best.map_or(true, |(_, b)| v > b) {
                    best = Some((var, v));
                }
            }
            if let Some((var, _)) = best {
                let d = self.binv.mul_vec(&self.column(var));
                self.x_b[l] = 0.0;
                self.pivot(var, l, &d, 0.0);
            }
        }
        // Refactoring cannot fail here: the basis stayed nonsingular.
        let _ = self.refactor();
    }

    /// Maximizes `objᵀu` over structural variables.
    fn phase_two(&mut self, obj: &[f64], budget: &mut PivotBudget) -> Result<Phase> {
        let m = self.m();
        let cost = |var: usize| if var < m { -obj[var] } else { 0.0 };
        self.optimize(&cost, &|var| var < m, true, budget)
    }

    /// Primal `y' = −π` for the phase-two cost `−obj`.
    fn primal_solution(&self, obj: &[f64]) -> Vec<f64> {
        let m = self.m();
        let cost = |var: usize| if var < m { -obj[var] } else { 0.0 };
        self.multipliers(&cost).into_iter().map(|v| -v).collect()
    }
}

/// Gauss–Jordan inverse with partial pivoting; `None` if singular.
fn invert(m: &DenseMatrix) -> Option<DenseMatrix> {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = DenseMatrix::identity(n);
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a.get(row, col).abs() > a.get(piv, col).abs() {
                piv = row;
            }
        }
        let pv = a.get(piv, col);
        if pv.abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                let (x, y) = (a.get(col, j), a.get(piv, j));
                a.set(col, j, y);
                a.set(piv, j, x);
                let (x, y) = (inv.get(col, j), inv.get(piv, j));
                inv.set(col, j, y);
                inv.set(piv, j, x);
            }
        }
        for j in 0..n {
            a.set(col, j, a.get(col, j) / pv);
            inv.set(col, j, inv.get(col, j) / pv);
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a.get(row, col);
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a.set(row, j, a.get(row, j) - f * a.get(col, j));
                inv.set(row, j, inv.get(row, j) - f * inv.get(col, j));
            }
        }
    }
    Some(inv)
}
