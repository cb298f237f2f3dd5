//! Successive projection: greedy selection of almost-pure nodes.
//!
//! Columns of the input index nodes. Each step picks the residual column with
//! the largest squared Euclidean norm and projects every residual column onto
//! the orthogonal complement of the picked one.

use crate::error::Result;
use crate::linalg::{project_out_in_place, DenseMatrix};

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SpaResult {
    /// Selected column indices, in selection order.
    pub indices: Vec<usize>,
    /// Euclidean norm of each selected residual column at selection time.
    pub residual_norms: Vec<f64>,
    /// Set when the residual vanished before `k` picks.
    pub stopped_early: bool,
}

/// Step-by-step successive projection over the columns of a matrix.
pub struct SuccessiveProjection {
    residual: DenseMatrix,
    /// Selection stops once the largest squared column norm drops to this.
    floor: f64,
    picked: Vec<usize>,
}

impl SuccessiveProjection {
    /// `zero_tol` is relative to the largest initial column norm.
    pub fn new(m: &DenseMatrix, zero_tol: f64) -> Self {
        let residual = m.clone();
        let initial = column_sq_norms(&residual)
            .into_iter()
            .fold(0.0, f64::max);
        SuccessiveProjection {
            residual,
            floor: zero_tol * zero_tol * initial,
            picked: Vec::new(),
        }
    }

    pub fn residual(&self) -> &DenseMatrix {
        &self.residual
    }

    /// Selects the next column; `None` once the residual is numerically zero.
    /// Ties go to the smallest index.
    pub fn step(&mut self) -> Result<Option<(usize, f64)>> {
        let norms = column_sq_norms(&self.residual);
        let mut best: Option<(usize, f64)> = None;
        for (j, &v) in norms.iter().enumerate() {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        let Some((idx, sq)) = best else {
            return Ok(None);
        };
        if sq <= self.floor || sq == 0.0 {
            return Ok(None);
        }
        let p = self.residual.column(idx);
        project_out_in_place(&mut self.residual, &p)?;
        self.picked.push(idx);
        Ok(Some((idx, sq.sqrt())))
    }
}

fn column_sq_norms(m: &DenseMatrix) -> Vec<f64> {
    let mut norms = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        for (s, v) in norms.iter_mut().zip(m.row(i)) {
            *s += v * v;
        }
    }
    norms
}

/// Runs up to `k` steps of successive projection on the columns of `m`.
pub fn successive_projection(m: &DenseMatrix, k: usize, zero_tol: f64) -> Result<SpaResult> {
    let mut spa = SuccessiveProjection::new(m, zero_tol);
    let mut indices = Vec::with_capacity(k);
    let mut residual_norms = Vec::with_capacity(k);
    while indices.len() < k.min(m.cols()) {
        match spa.step()? {
            Some((idx, norm)) => {
                indices.push(idx);
                residual_norms.push(norm);
            }
            None => break,
        }
    }
    let stopped_early = indices.len() < k;
    Ok(SpaResult {
        indices,
        residual_norms,
        stopped_early,
    })
}
