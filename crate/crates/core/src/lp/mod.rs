//! Per-community linear programs and the full SP+LP recovery.
//!
//! For an anchor node `i` and a basis `M` of the community subspace, the LP
//! is `min eᵀx  s.t.  x ≥ 0, x_i ≥ 1, x = My`. Substituting `x = My` leaves a
//! problem in the `r` free variables `y`, solved by [`simplex_core`].

mod simplex;

pub use simplex::{simplex_core, LpStatus, SimplexOptions, SimplexOutcome};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{top_k_eigs, DenseMatrix, EigenConfig};
use crate::mmsb::WeightedGraph;
use crate::spa::{successive_projection, SpaResult, DEFAULT_ZERO_TOL};

/// Anchored LP over the column space of `basis` (`n×r`, `r ≤ n`).
#[derive(Clone, Copy, Debug)]
pub struct LpProblem<'a> {
    basis: &'a DenseMatrix,
    anchor: usize,
}

impl<'a> LpProblem<'a> {
    pub fn new(basis: &'a DenseMatrix, anchor: usize) -> Result<Self> {
        let (n, r) = (basis.rows(), basis.cols());
        if r == 0 || r > n {
            return Err(Error::invalid(format!(
                "basis must be n x r with 1 <= r <= n, got {n}x{r}"
            )));
        }
        if anchor >= n {
            return Err(Error::invalid(format!("anchor {anchor} out of range for n = {n}")));
        }
        Ok(LpProblem { basis, anchor })
    }

    pub fn basis(&self) -> &DenseMatrix {
        self.basis
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// `eᵀM`, the objective in `y`.
    pub fn objective_vector(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.basis.cols()];
        for i in 0..self.basis.rows() {
            for (cj, v) in c.iter_mut().zip(self.basis.row(i)) {
                *cj += v;
            }
        }
        c
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub y_star: Vec<f64>,
    /// `M·y_star`; empty unless optimal.
    pub x_star: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub fn solve_anchor_lp(prob: &LpProblem) -> Result<LpSolution> {
    solve_anchor_lp_with(prob, &SimplexOptions::default())
}

pub fn solve_anchor_lp_with(prob: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    let m = prob.basis;
    let (n, r) = (m.rows(), m.cols());
    // Rows 0..n encode x ≥ 0, row n encodes x_anchor ≥ 1.
    let mut stacked = Vec::with_capacity((n + 1) * r);
    stacked.extend_from_slice(m.as_slice());
    stacked.extend_from_slice(m.row(prob.anchor));
    let a = DenseMatrix::from_vec(n + 1, r, stacked)?;
    let mut b = vec![0.0; n + 1];
    b[n] = 1.0;
    let c = prob.objective_vector();

    let out = simplex_core(&a, &b, &c, opts)?;
    if out.status != LpStatus::Optimal {
        return Ok(LpSolution {
            status: out.status,
            y_star: Vec::new(),
            x_star: Vec::new(),
            objective: out.objective,
            iterations: out.iterations,
        });
    }
    let x_star = m.mul_vec(&out.y);
    let objective = x_star.iter().sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        y_star: out.y,
        x_star,
        objective,
        iterations: out.iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryMode {
    /// Input is the exact probability matrix `P`.
    Exact,
    /// Input is an observed adjacency `A`; the LP constraint uses the top-k
    /// eigenvectors of `A`.
    Spectral,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RecoveryConfig {
    pub eigen: EigenConfig,
    pub simplex: SimplexOptions,
    /// Relative zero tolerance for successive projection; `None` uses the
    /// module default.
    pub spa_zero_tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ColumnReport {
    pub anchor: Option<usize>,
    /// `None` if there was no anchor or the solver failed (see `note`).
    pub status: Option<LpStatus>,
    pub objective: f64,
    pub iterations: usize,
    /// `‖x*‖_∞` fell below 1, so the column was left unnormalized.
    pub suspect: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RecoveryResult {
    /// `n×k`; column `j` is `x*/‖x*‖_∞` for the `j`-th anchor.
    pub theta_hat: DenseMatrix,
    pub spa: SpaResult,
    pub columns: Vec<ColumnReport>,
    /// Top-k eigenvalues of the input.
    pub eigenvalues: Vec<f64>,
}

impl RecoveryResult {
    pub fn per_column_status(&self) -> Vec<Option<LpStatus>> {
        self.columns.iter().map(|c| c.status).collect()
    }

    pub fn all_optimal(&self) -> bool {
        self.columns
            .iter()
            .all(|c| c.status == Some(LpStatus::Optimal) && !c.suspect)
    }
}

pub fn recover_all<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    k: usize,
    mode: RecoveryMode,
    rng: &mut R,
) -> Result<RecoveryResult> {
    recover_all_with(graph, k, mode, &RecoveryConfig::default(), rng)
}

/// SP+LP: successive projection for the anchors, then one LP per community.
///
/// Exact mode runs successive projection on `P` and uses `V·diag(λ)` from the
/// top-k eigenpairs of `P` as the LP basis. Spectral mode uses the top-k
/// eigenvectors `V` of `A` as the LP basis and runs successive projection on
/// `VᵀA`, whose columns have the same norms and inner products as those of
/// the denoised `V(VᵀA)`.
pub fn recover_all_with<R: Rng + ?Sized>(
    graph: &WeightedGraph,
    k: usize,
    mode: RecoveryMode,
    cfg: &RecoveryConfig,
    rng: &mut R,
) -> Result<RecoveryResult> {
    let n = graph.n();
    if k < 2 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in [2, {n}]")));
    }
    let adj = graph.adjacency();
    let zero_tol = cfg.spa_zero_tol.unwrap_or(DEFAULT_ZERO_TOL);
    let embedding = top_k_eigs(adj, k, &cfg.eigen, rng)?;

    let (spa, basis) = match mode {
        RecoveryMode::Exact => (
            successive_projection(adj, k, zero_tol)?,
            embedding.scaled_vectors(),
        ),
        RecoveryMode::Spectral => {
            // Vᵀ A = (A V)ᵀ since A is symmetric.
            let projected = adj.matmul(&embedding.vectors)?.transpose();
            (
                successive_projection(&projected, k, zero_tol)?,
                embedding.vectors.clone(),
            )
        }
    };

    let solved: Vec<(Vec<f64>, ColumnReport)> = (0..k)
        .into_par_iter()
        .map(|j| solve_column(&basis, spa.indices.get(j).copied(), &cfg.simplex))
        .collect();

    let mut theta_hat = DenseMatrix::zeros(n, k);
    let mut columns = Vec::with_capacity(k);
    for (j, (col, report)) in solved.into_iter().enumerate() {
        theta_hat.set_column(j, &col);
        columns.push(report);
    }
    Ok(RecoveryResult {
        theta_hat,
        spa,
        columns,
        eigenvalues: embedding.values,
    })
}

fn solve_column(
    basis: &DenseMatrix,
    anchor: Option<usize>,
    opts: &SimplexOptions,
) -> (Vec<f64>, ColumnReport) {
    let n = basis.rows();
    let mut report = ColumnReport {
        anchor,
        status: None,
        objective: f64::NAN,
        iterations: 0,
        suspect: false,
        note: None,
    };
    let Some(anchor) = anchor else {
        report.note = Some("successive projection returned fewer than k anchors".into());
        return (vec![0.0; n], report);
    };
    let solution = LpProblem::new(basis, anchor).and_then(|p| solve_anchor_lp_with(&p, opts));
    match solution {
        Err(e) => {
            report.note = Some(e.to_string());
            (vec![0.0; n], report)
        }
        Ok(sol) => {
            report.status = Some(sol.status);
            report.objective = sol.objective;
            report.iterations = sol.iterations;
            if sol.status != LpStatus::Optimal {
                return (vec![0.0; n], report);
            }
            let inf = sol.x_star.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if inf < 1.0 - 1e-6 {
                report.suspect = true;
                return (sol.x_star, report);
            }
            (sol.x_star.iter().map(|v| v / inf).collect(), report)
        }
    }
}
