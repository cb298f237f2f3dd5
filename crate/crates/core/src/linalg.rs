//! Dense real matrix kernels.
//!
//! Everything here is row-major `f64`. The symmetric eigensolver is cyclic
//! Jacobi for small inputs and shifted subspace iteration with Rayleigh–Ritz
//! projection and locking for larger ones.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Matrices with at most this many rows go through full Jacobi in
/// [`top_k_eigs`].
pub const JACOBI_CUTOFF: usize = 64;

const PAR_MIN_ROWS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `self · other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        let oc = other.cols;
        if oc == 0 {
            return Ok(out);
        }
        let kernel = |(i, out_row): (usize, &mut [f64])| {
            for (l, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o += a * b;
                }
            }
        };
        if self.rows >= PAR_MIN_ROWS {
            out.data.par_chunks_mut(oc).enumerate().for_each(kernel);
        } else {
            out.data.chunks_mut(oc).enumerate().for_each(kernel);
        }
        Ok(out)
    }

    /// `selfᵀ · other`, without materializing the transpose.
    pub fn t_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(Error::invalid(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.cols, other.cols);
        for l in 0..self.rows {
            let a_row = self.row(l);
            let b_row = other.row(l);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Multiplies column `j` by `scales[j]`.
    pub fn scale_columns(&self, scales: &[f64]) -> DenseMatrix {
        debug_assert_eq!(scales.len(), self.cols);
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * scales[j])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest `|a_ij − a_ji|`; infinite for non-square matrices.
    pub fn max_asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Top-k eigenpairs of a symmetric matrix. Columns of `vectors` are
/// orthonormal and `values` is sorted non-increasing.
#[derive(Clone, Debug)]
pub struct SpectralEmbedding {
    pub vectors: DenseMatrix,
    pub values: Vec<f64>,
}

impl SpectralEmbedding {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// `V·diag(values)`, the column-space factor of the rank-k approximation.
    pub fn scaled_vectors(&self) -> DenseMatrix {
        self.vectors.scale_columns(&self.values)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EigenConfig {
    /// Relative residual tolerance; see [`top_k_eigs`].
    pub tol: f64,
    /// Iteration cap for subspace iteration; `None` means `10·n`.
    pub max_iter: Option<usize>,
    /// Maximum asymmetry accepted as "symmetric".
    pub symmetry_tol: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: 1e-8,
            max_iter: None,
            symmetry_tol: 1e-10,
        }
    }
}

/// The `k` algebraically largest eigenpairs of the symmetric matrix `a`.
///
/// Every returned pair satisfies `‖A v − λ v‖₂ ≤ tol · max(1, ‖A‖_max · n)`.
/// Inputs with `n ≤ 64` are solved exactly by cyclic Jacobi; larger ones use
/// subspace iteration on `A + cI`, where the shift `c ≥ 0` makes the wanted
/// eigenvalues dominant in magnitude. `rng` seeds the starting subspace.
pub fn top_k_eigs<R: Rng + ?Sized>(
    a: &DenseMatrix,
    k: usize,
    cfg: &EigenConfig,
    rng: &mut R,
) -> Result<SpectralEmbedding> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::invalid(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in [1, {n}]")));
    }
    let asym = a.max_asymmetry();
    if asym > cfg.symmetry_tol {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }

    if n <= JACOBI_CUTOFF {
        let (values, vectors) = symmetric_eigen(a);
        let vectors = DenseMatrix::from_fn(n, k, |i, j| vectors.get(i, j));
        return Ok(SpectralEmbedding {
            vectors,
            values: values[..k].to_vec(),
        });
    }

    let threshold = cfg.tol * (a.max_abs() * n as f64).max(1.0);
    let max_iter = cfg.max_iter.unwrap_or(10 * n).max(1);
    SubspaceIteration::new(a, k, threshold, rng).run(max_iter)
}

struct SubspaceIteration<'a, R: Rng + ?Sized> {
    a: &'a DenseMatrix,
    k: usize,
    block: usize,
    shift: f64,
    threshold: f64,
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> SubspaceIteration<'a, R> {
    fn new(a: &'a DenseMatrix, k: usize, threshold: f64, rng: &'a mut R) -> Self {
        let n = a.rows();
        let block = (k + k.max(8)).min(n);
        let shift = negative_spectrum_shift(a, rng);
        SubspaceIteration {
            a,
            k,
            block,
            shift,
            threshold,
            rng,
        }
    }

    fn run(self, max_iter: usize) -> Result<SpectralEmbedding> {
        let n = self.a.rows();
        let p = self.block;

        // Locked (converged) Ritz pairs live in the leading columns of `q`.
        let mut q = DenseMatrix::from_fn(n, p, |_, _| self.rng.sample(StandardNormal));
        orthonormalize_columns(&mut q, 0, self.rng);
        let mut locked_values: Vec<f64> = Vec::new();
        let mut locked_av: Vec<Vec<f64>> = Vec::new();
        let mut best_residual = f64::INFINITY;

        for _ in 0..max_iter {
            let nl = locked_values.len();
            let active = DenseMatrix::from_fn(n, p - nl, |i, j| q.get(i, nl + j));
            let aq = self.a.matmul(&active)?;

            // Rayleigh–Ritz on the active block.
            let h = symmetrize(active.t_matmul(&aq)?);
            let (theta, w) = symmetric_eigen(&h);
            let u = active.matmul(&w)?;
            let au = aq.matmul(&w)?;

            let mut residuals = Vec::with_capacity(theta.len());
            for (j, &t) in theta.iter().enumerate() {
                let r: f64 = (0..n)
                    .map(|i| {
                        let d = au.get(i, j) - t * u.get(i, j);
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt();
                residuals.push(r);
            }

            let wanted = self.k - nl;
            let selected = select_top(&locked_values, &theta, self.k);
            let worst = selected
                .iter()
                .filter(|&&idx| idx >= nl)
                .map(|&idx| residuals[idx - nl])
                .fold(0.0, f64::max);
            best_residual = best_residual.min(worst);
            if worst <= self.threshold {
                return Ok(self.finish(&q, nl, &u, &selected, &locked_values, &theta));
            }

            // Lock the converged leading Ritz pairs, in order.
            let mut newly = 0;
            while newly < wanted && residuals[newly] <= self.threshold {
                newly += 1;
            }
            for j in 0..newly {
                locked_values.push(theta[j]);
                locked_av.push(au.column(j));
            }

            // Next iterate: (A + cI)·U for the non-locked Ritz vectors.
            for j in 0..(p - nl) {
                let dest = nl + j;
                for i in 0..n {
                    let v = if j < newly {
                        u.get(i, j)
                    } else {
                        au.get(i, j) + self.shift * u.get(i, j)
                    };
                    q.set(i, dest, v);
                }
            }
            orthonormalize_columns(&mut q, nl + newly, self.rng);
        }

        Err(Error::ConvergenceFailure {
            iterations: max_iter,
            residual: best_residual,
        })
    }

    fn finish(
        &self,
        q: &DenseMatrix,
        nl: usize,
        u: &DenseMatrix,
        selected: &[usize],
        locked_values: &[f64],
        theta: &[f64],
    ) -> SpectralEmbedding {
        let n = self.a.rows();
        let mut vectors = DenseMatrix::zeros(n, self.k);
        let mut values = Vec::with_capacity(self.k);
        for (out, &idx) in selected.iter().enumerate() {
            let (value, col) = if idx < nl {
                (locked_values[idx], q.column(idx))
            } else {
                (theta[idx - nl], u.column(idx - nl))
            };
            values.push(value);
            vectors.set_column(out, &canonical_sign(col));
        }
        SpectralEmbedding { vectors, values }
    }
}

/// Indices of the `k` algebraically largest values among the locked values
/// (indices `0..nl`) followed by the active Ritz values (indices `nl..`).
fn select_top(locked: &[f64], active: &[f64], k: usize) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> = locked
        .iter()
        .chain(active)
        .copied()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    cand.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    cand.into_iter().take(k).map(|(_, i)| i).collect()
}

fn symmetrize(mut h: DenseMatrix) -> DenseMatrix {
    let n = h.rows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (h.get(i, j) + h.get(j, i));
            h.set(i, j, v);
            h.set(j, i, v);
        }
    }
    h
}

/// Shift `c ≥ 0` with `λ_min(A) + c` close to zero, so the algebraically
/// largest eigenvalues of `A + cI` are also the largest in magnitude.
fn negative_spectrum_shift<R: Rng + ?Sized>(a: &DenseMatrix, rng: &mut R) -> f64 {
    let n = a.rows();
    // Gershgorin radius bounds every |λ|.
    let rho = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if rho == 0.0 {
        return 0.0;
    }
    // Power iteration on ρI − A converges to ρ − λ_min.
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut mu = 0.0;
    for _ in 0..60 {
        let av = a.mul_vec(&v);
        let w: Vec<f64> = v.iter().zip(&av).map(|(x, y)| rho * x - y).collect();
        mu = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            break;
        }
        v = w.into_iter().map(|x| x / nw).collect();
    }
    let lambda_min = rho - mu;
    if lambda_min >= 0.0 {
        0.0
    } else {
        // Rayleigh quotients underestimate |λ_min|; pad the estimate.
        (-lambda_min * 1.1).min(rho)
    }
}

/// Modified Gram–Schmidt (two passes) on columns `from..`, keeping them
/// orthogonal to the leading `from` columns. Collapsed columns are replaced
/// with fresh random directions.
fn orthonormalize_columns<R: Rng + ?Sized>(q: &mut DenseMatrix, from: usize, rng: &mut R) {
    let n = q.rows();
    let p = q.cols();
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| q.column(j)).collect();
    for j in from..p {
        let scale = norm2(&cols[j]);
        let mut attempts = 0;
        loop {
            for _ in 0..2 {
                for prev in 0..j {
                    let (head, tail) = cols.split_at_mut(j);
                    let c = dot(&head[prev], &tail[0]);
                    for (x, y) in tail[0].iter_mut().zip(&head[prev]) {
                        *x -= c * y;
                    }
                }
            }
            let nrm = norm2(&cols[j]);
            if nrm > 1e-10 * scale.max(f64::MIN_POSITIVE) && nrm > 0.0 {
                cols[j].iter_mut().for_each(|x| *x /= nrm);
                break;
            }
            attempts += 1;
            assert!(attempts < 16, "could not extend orthonormal basis");
            cols[j] = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        }
    }
    for (j, c) in cols.iter().enumerate() {
        q.set_column(j, c);
    }
}

/// Flips the sign so the largest-magnitude entry is positive.
fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted non-increasing and the matching eigenvectors as
/// the columns of an `n×n` matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let total: f64 = m.data.iter().map(|x| x * x).sum();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m.get(i, j) * m.get(i, j);
            }
        }
        if off <= 1e-32 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let mrp = m.get(r, p);
                    let mrq = m.get(r, q);
                    m.set(r, p, c * mrp - s * mrq);
                    m.set(r, q, s * mrp + c * mrq);
                }
                for r in 0..n {
                    let mpr = m.get(p, r);
                    let mqr = m.get(q, r);
                    m.set(p, r, c * mpr - s * mqr);
                    m.set(q, r, s * mpr + c * mqr);
                }
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);
                for r in 0..n {
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, c * vrp - s * vrq);
                    v.set(r, q, s * vrp + c * vrq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m.get(y, y).total_cmp(&m.get(x, x)).then(x.cmp(&y)));
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (out, &i) in order.iter().enumerate() {
        vectors.set_column(out, &canonical_sign(v.column(i)));
    }
    (values, vectors)
}

/// `R − p(pᵀR)/‖p‖²`: removes the component along `p` from every column of
/// `R` without forming the projector.
pub fn project_out(r: &DenseMatrix, p: &[f64]) -> Result<DenseMatrix> {
    let mut out = r.clone();
    project_out_in_place(&mut out, p)?;
    Ok(out)
}

pub fn project_out_in_place(r: &mut DenseMatrix, p: &[f64]) -> Result<()> {
    if p.len() != r.rows() {
        return Err(Error::invalid(format!(
            "projection vector has length {}, matrix has {} rows",
            p.len(),
            r.rows()
        )));
    }
    let pp = dot(p, p);
    if pp == 0.0 || !pp.is_finite() {
        return Err(Error::invalid("cannot project out a zero vector"));
    }
    let cols = r.cols();
    let mut coeff = vec![0.0; cols];
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        for (c, &x) in coeff.iter_mut().zip(r.row(i)) {
            *c += pi * x;
        }
    }
    coeff.iter_mut().for_each(|c| *c /= pp);
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        for (x, &c) in r.row_mut(i).iter_mut().zip(&coeff) {
            *x -= pi * c;
        }
    }
    Ok(())
}

/// Singular values of a (small) matrix, non-increasing, via the eigenvalues of
/// `MᵀM` with negative round-off clamped to zero.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::invalid("singular values of an empty matrix"));
    }
    let gram = symmetrize(m.t_matmul(m)?);
    let (values, _) = symmetric_eigen(&gram);
    Ok(values.into_iter().map(|v| v.max(0.0).sqrt()).collect())
}

/// Ratio of the largest to the smallest singular value; infinite when the
/// smallest is zero.
pub fn condition_number(m: &DenseMatrix) -> Result<f64> {
    let sv = singular_values(m)?;
    let smin = *sv.last().unwrap();
    Ok(if smin == 0.0 { f64::INFINITY } else { sv[0] / smin })
}
