//! Mixed-membership stochastic blockmodel: parameters, sampling of the
//! node-community distribution matrix, the probability matrix `P = ΘBΘᵀ`, and
//! averaged Bernoulli adjacency samples.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Model parameters `(n, k, α, B)`.
#[derive(Clone, Debug)]
pub struct MmsbParams {
    pub n: usize,
    pub k: usize,
    /// Shared Dirichlet concentration for all `k` communities.
    pub alpha: f64,
    /// `k×k` symmetric community interaction matrix with entries in `[0, 1]`.
    pub b: DenseMatrix,
}

impl MmsbParams {
    pub fn new(n: usize, k: usize, alpha: f64, b: DenseMatrix) -> Result<Self> {
        let p = MmsbParams { n, k, alpha, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid(format!("k = {} must be at least 2", self.k)));
        }
        if self.n < self.k {
            return Err(Error::invalid(format!(
                "n = {} must be at least k = {}",
                self.n, self.k
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha = {} must be positive", self.alpha)));
        }
        validate_interaction(&self.b, self.k)
    }
}

fn validate_interaction(b: &DenseMatrix, k: usize) -> Result<()> {
    if b.rows() != k || b.cols() != k {
        return Err(Error::invalid(format!(
            "B is {}x{}, expected {k}x{k}",
            b.rows(),
            b.cols()
        )));
    }
    if b.max_asymmetry() > 1e-12 {
        return Err(Error::invalid("B must be symmetric"));
    }
    if b.as_slice().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::invalid("B entries must lie in [0, 1]"));
    }
    Ok(())
}

/// Row-stochastic `n×k` node-community distribution matrix Θ.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMatrix(DenseMatrix);

impl ThetaMatrix {
    /// Wraps `theta` after checking entries lie in `[0, 1]` and rows sum to 1
    /// within `1e-12`.
    pub fn new(theta: DenseMatrix) -> Result<Self> {
        for i in 0..theta.rows() {
            let row = theta.row(i);
            if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::invalid(format!("row {i} has entries outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(ThetaMatrix(theta))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn k(&self) -> usize {
        self.0.cols()
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.0
    }

    /// Column sums `c = Θᵀe`, the expected community sizes.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.k()];
        for i in 0..self.n() {
            for (cj, v) in c.iter_mut().zip(self.0.row(i)) {
                *cj += v;
            }
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    /// The model probability matrix `P` itself.
    ExactP,
    /// Average of `samples` Bernoulli adjacency draws with unit diagonal.
    SampledAverage,
    /// Loaded from an external weighted edge list.
    Observed,
}

/// Symmetric weighted adjacency with entries in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    adj: DenseMatrix,
    kind: GraphKind,
    samples: usize,
}

impl WeightedGraph {
    pub fn new(adj: DenseMatrix, kind: GraphKind, samples: usize) -> Result<Self> {
        if adj.rows() != adj.cols() {
            return Err(Error::invalid("adjacency must be square"));
        }
        if adj.max_asymmetry() > 1e-12 {
            return Err(Error::invalid("adjacency must be symmetric"));
        }
        if adj.as_slice().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invalid("adjacency entries must lie in [0, 1]"));
        }
        if kind == GraphKind::SampledAverage && (0..adj.rows()).any(|i| adj.get(i, i) != 1.0) {
            return Err(Error::invalid("sampled adjacency must have unit diagonal"));
        }
        let samples = if kind == GraphKind::ExactP { 0 } else { samples };
        Ok(WeightedGraph { adj, kind, samples })
    }

    pub fn n(&self) -> usize {
        self.adj.rows()
    }

    pub fn adjacency(&self) -> &DenseMatrix {
        &self.adj
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

/// Default number of averaged samples, `⌈√n⌉`.
pub fn default_samples(n: usize) -> usize {
    let mut s = (n as f64).sqrt() as usize;
    while s * s < n {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s.max(1)
}

/// Draws one Dirichlet(α, …, α) vector into `out` by normalizing independent
/// Gamma(α, 1) draws.
pub fn sample_dirichlet_row<R: Rng + ?Sized>(alpha: f64, out: &mut [f64], rng: &mut R) {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha validated positive");
    loop {
        let mut sum = 0.0;
        for v in out.iter_mut() {
            *v = gamma.sample(rng);
            sum += *v;
        }
        if sum > 0.0 && sum.is_finite() {
            out.iter_mut().for_each(|v| *v /= sum);
            return;
        }
        // Every draw underflowed (tiny α); redraw.
    }
}

/// `n` independent Dirichlet(α, …, α) rows.
pub fn sample_theta<R: Rng + ?Sized>(params: &MmsbParams, rng: &mut R) -> ThetaMatrix {
    let mut theta = DenseMatrix::zeros(params.n, params.k);
    for i in 0..params.n {
        sample_dirichlet_row(params.alpha, theta.row_mut(i), rng);
    }
    ThetaMatrix(theta)
}

/// `P = ΘBΘᵀ`, computed on the upper triangle and mirrored so the result is
/// exactly symmetric.
pub fn build_probability_matrix(theta: &ThetaMatrix, b: &DenseMatrix) -> Result<WeightedGraph> {
    validate_interaction(b, theta.k())?;
    let t = theta.as_matrix();
    let tb = t.matmul(b)?;
    let n = t.rows();
    let mut p = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let left = tb.row(i);
        for j in i..n {
            let v = crate::linalg::dot(left, t.row(j)).clamp(0.0, 1.0);
            p.set(i, j, v);
            p.set(j, i, v);
        }
    }
    WeightedGraph::new(p, GraphKind::ExactP, 0)
}

/// Average of `s` independent symmetric 0/1 adjacency samples drawn from `p`,
/// with every diagonal entry set to 1.
///
/// Each upper-triangle entry receives the number of successes out of `s`
/// Bernoulli(`P_ij`) trials, drawn as a single Binomial(`s`, `P_ij`) count.
pub fn sample_adjacency_average<R: Rng + ?Sized>(
    p: &WeightedGraph,
    s: usize,
    rng: &mut R,
) -> Result<WeightedGraph> {
    let trials = s as u64;
    sample_adjacency_average_with(p, s, |_, _, prob| {
        if prob <= 0.0 {
            0
        } else if prob >= 1.0 {
            trials
        } else {
            Binomial::new(trials, prob)
                .expect("probability in (0, 1)")
                .sample(rng)
        }
    })
}

/// Like [`sample_adjacency_average`] but with a caller-supplied success
/// counter `draw(i, j, P_ij) -> successes out of s`, called once per `i < j`
/// in row-major order.
pub fn sample_adjacency_average_with(
    p: &WeightedGraph,
    s: usize,
    mut draw: impl FnMut(usize, usize, f64) -> u64,
) -> Result<WeightedGraph> {
    if s == 0 {
        return Err(Error::invalid("number of samples must be at least 1"));
    }
    let n = p.n();
    let inv = 1.0 / s as f64;
    let mut a = DenseMatrix::zeros(n, n);
    let src = p.adjacency();
    for i in 0..n {
        a.set(i, i, 1.0);
        for j in i + 1..n {
            let count = draw(i, j, src.get(i, j));
            if count > s as u64 {
                return Err(Error::invalid(format!(
                    "sampler returned {count} successes out of {s}"
                )));
            }
            let v = if count == s as u64 { 1.0 } else { count as f64 * inv };
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    WeightedGraph::new(a, GraphKind::SampledAverage, s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteractionKind {
    /// `(1 − δ)·I + δ·eeᵀ`.
    DeltaBlend,
    /// `0.5·I + 0.5·diag(U[0, 1] draws)`.
    DiagRandom,
}

pub fn make_interaction_matrix<R: Rng + ?Sized>(
    kind: InteractionKind,
    k: usize,
    delta: f64,
    rng: &mut R,
) -> Result<DenseMatrix> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k} must be at least 2")));
    }
    match kind {
        InteractionKind::DeltaBlend => {
            if !(0.0..=1.0).contains(&delta) {
                return Err(Error::invalid(format!("delta = {delta} must lie in [0, 1]")));
            }
            Ok(DenseMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    1.0
                } else {
                    delta
                }
            }))
        }
        InteractionKind::DiagRandom => {
            let diag: Vec<f64> = (0..k).map(|_| 0.5 + 0.5 * rng.gen::<f64>()).collect();
            Ok(DenseMatrix::from_diag(&diag))
        }
    }
}
