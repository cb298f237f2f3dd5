//! Closed-form constants and the sample-size condition of the main recovery
//! guarantee, the regularized incomplete beta function, and empirical checks
//! of the concentration lemmas behind the guarantee.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, symmetric_eigen, top_k_eigs, DenseMatrix, EigenConfig};
use crate::mmsb::{sample_theta, MmsbParams};
use crate::rng::stream;

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// `I_x(a, b)` at or above `1 − UNSATISFIABLE_GAP` makes the sample-size
/// condition meaningless in double precision.
pub const UNSATISFIABLE_GAP: f64 = 1e-15;

/// Smallest singular value of `B` accepted as full rank.
pub const SINGULAR_B_TOL: f64 = 1e-12;

fn check_beta_args(x: f64, a: f64, b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("x = {x} must lie in [0, 1]")));
    }
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!(
            "shape parameters a = {a}, b = {b} must be positive and finite"
        )));
    }
    Ok(())
}

/// The regularized incomplete beta function `I_x(a, b)`, the CDF of
/// Beta(a, b) at `x`.
pub fn reg_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_args(x, a, b)?;
    Ok(incomplete_beta_pair(x, 1.0 - x, a, b).0)
}

/// `1 − I_x(a, b)`, computed without cancellation. Taking `1 − x` as the
/// argument keeps full relative precision when `x` is close to 1.
pub fn reg_incomplete_beta_complement(one_minus_x: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_args(one_minus_x, a, b)?;
    Ok(incomplete_beta_pair(1.0 - one_minus_x, one_minus_x, a, b).1)
}

/// Returns `(I_x(a,b), 1 − I_x(a,b))` given both `x` and `y = 1 − x`, each
/// side evaluated directly where it is accurate.
fn incomplete_beta_pair(x: f64, y: f64, a: f64, b: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    // The continued fraction converges fast for x < (a+1)/(a+b+2); otherwise
    // use the symmetry I_x(a,b) = 1 − I_{1−x}(b,a).
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = front_factor(x, y, a, b) * beta_continued_fraction(x, a, b) / a;
        (lower, 1.0 - lower)
    } else {
        let upper = front_factor(y, x, b, a) * beta_continued_fraction(y, b, a) / b;
        (1.0 - upper, upper)
    }
}

/// `xᵃ yᵇ / B(a, b)` with `y = 1 − x`.
fn front_factor(x: f64, y: f64, a: f64, b: f64) -> f64 {
    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    (a * x.ln() + b * y.ln() - ln_beta).exp()
}

/// Modified Lentz evaluation of the standard continued fraction for the
/// incomplete beta function.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let guard = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + even * d);
        c = guard(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + odd * d);
        c = guard(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// How to pick the near-purity tolerance ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonChoice {
    /// `0.5 · min(ε₁, ε₂)`.
    Auto,
    Value(f64),
}

/// The sample-size threshold for the near-pure-node event.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinN {
    Finite(u64),
    /// `I_{1−ε}(α, (k−1)α)` is within 1e-15 of 1, so no finite `n` can be
    /// certified in double precision.
    Unsatisfiable,
}

impl std::fmt::Display for MinN {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MinN::Finite(n) => write!(f, "{n}"),
            MinN::Unsatisfiable => f.write_str("unsatisfiable"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremBounds {
    /// `w = 8κ√(αk+1)`.
    pub w: f64,
    /// `min(1/√(k−1), 1/2) · 1/(2√2·w(1+80w²))`.
    pub epsilon1: f64,
    /// `7 / (3520√2·k·w²)`.
    pub epsilon2: f64,
    pub kappa: f64,
    pub min_n: MinN,
    pub p: f64,
    pub epsilon: f64,
    /// Whether `ε ∈ (0, min(ε₁, ε₂))`, the range the guarantee asks for. An
    /// explicit ε outside it is still evaluated.
    pub epsilon_in_range: bool,
    /// `I_{1−ε}(α, (k−1)α)`.
    pub near_pure_cdf: f64,
}

/// Bounds for the model `params`, with κ taken from the singular values of B.
pub fn compute_bounds(params: &MmsbParams, p: f64, epsilon: EpsilonChoice) -> Result<TheoremBounds> {
    params.validate()?;
    let sv = singular_values(&params.b)?;
    let smin = *sv.last().expect("k ≥ 2");
    if smin <= SINGULAR_B_TOL {
        return Err(Error::invalid(format!(
            "B is singular (smallest singular value {smin:e})"
        )));
    }
    compute_bounds_from_kappa(params.k, params.alpha, sv[0] / smin, p, epsilon)
}

/// Bounds from the condition number of B directly.
pub fn compute_bounds_from_kappa(
    k: usize,
    alpha: f64,
    kappa: f64,
    p: f64,
    epsilon: EpsilonChoice,
) -> Result<TheoremBounds> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k} must be at least 2")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha = {alpha} must be positive")));
    }
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa = {kappa} must be finite and at least 1")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
    }
    let kf = k as f64;
    let sqrt2 = std::f64::consts::SQRT_2;
    let w = 8.0 * kappa * (alpha * kf + 1.0).sqrt();
    let epsilon1 = (1.0 / (kf - 1.0).sqrt()).min(0.5) / (2.0 * sqrt2 * w * (1.0 + 80.0 * w * w));
    let epsilon2 = 7.0 / (3520.0 * sqrt2 * kf * w * w);
    let upper = epsilon1.min(epsilon2);
    let epsilon = match epsilon {
        EpsilonChoice::Auto => 0.5 * upper,
        EpsilonChoice::Value(e) => {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::invalid(format!("epsilon = {e} must lie in (0, 1)")));
            }
            e
        }
    };
    let a = alpha;
    let b = (kf - 1.0) * alpha;
    // 1 − I_{1−ε}(α, (k−1)α), evaluated directly so that log I stays accurate.
    let gap = reg_incomplete_beta_complement(epsilon, a, b)?;
    let near_pure_cdf = 1.0 - gap;
    let min_n = if gap <= UNSATISFIABLE_GAP {
        MinN::Unsatisfiable
    } else {
        let ratio = (p / kf).ln() / (-gap).ln_1p();
        if ratio.is_finite() && ratio < u64::MAX as f64 {
            MinN::Finite((ratio.floor() as u64 + 1).max(1))
        } else {
            MinN::Unsatisfiable
        }
    };
    Ok(TheoremBounds {
        w,
        epsilon1,
        epsilon2,
        kappa,
        min_n,
        p,
        epsilon,
        epsilon_in_range: epsilon > 0.0 && epsilon < upper,
        near_pure_cdf,
    })
}

/// Failure-probability expressions from the concentration lemmas. They may
/// exceed 1 at small `n`, where the lemmas are vacuous.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundProbabilities {
    /// `2k·exp(−n/(50k²))`: some `c_j` leaves `[0.9n/k, 1.1n/k]`.
    pub p1: f64,
    /// `5^k·exp(−2n/k²)`: `‖Θ‖ > 2√(2n/k)`.
    pub p2: f64,
    /// `p₂ + (16u√(αk+1)/l + 1)^k · exp(−n l⁴ / (2k²u⁴(αk+1)²))`:
    /// `σ_k(ΘB)` falls below its lower bound.
    pub p3: f64,
}

impl BoundProbabilities {
    pub fn new(n: usize, k: usize, alpha: f64, l: f64, u: f64) -> Self {
        let nf = n as f64;
        let kf = k as f64;
        let p1 = 2.0 * kf * (-nf / (50.0 * kf * kf)).exp();
        let p2 = 5f64.powf(kf) * (-2.0 * nf / (kf * kf)).exp();
        let ak1 = alpha * kf + 1.0;
        let p3 = p2
            + (16.0 * u * ak1.sqrt() / l + 1.0).powf(kf)
                * (-nf * l.powi(4) / (2.0 * kf * kf * u.powi(4) * ak1 * ak1)).exp();
        BoundProbabilities { p1, p2, p3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationReport {
    pub trials: usize,
    /// Trials with some `c_j ∉ [0.9n/k, 1.1n/k]`, where `c = Θᵀe`.
    pub c_vector_violations: usize,
    /// Trials with `c_min/c_max < 9/11`.
    pub c_ratio_violations: usize,
    /// Trials with `‖Θ‖ > 2√(2n/k)`.
    pub theta_norm_violations: usize,
    /// Trials with `σ_k(ΘB) < (1/4)(l/√(αk+1))√(2n/k)`.
    pub sigma_k_violations: usize,
    pub bound_probabilities: BoundProbabilities,
    /// Largest `|Σ_j c_j − n|` seen; row-stochasticity makes this round-off.
    pub max_c_sum_error: f64,
    /// Largest observed `‖Θ‖ / √(2n/k)` (the bound is 2).
    pub max_theta_norm_ratio: f64,
    /// Smallest observed `σ_k(ΘB) / ((l/√(αk+1))√(2n/k))` (the bound is 1/4).
    pub min_sigma_k_ratio: f64,
}

impl ConcentrationReport {
    /// One-sided check that `violations/trials` does not exceed `bound` by
    /// more than four binomial standard deviations.
    pub fn within_bound(violations: usize, trials: usize, bound: f64) -> bool {
        let b = bound.clamp(0.0, 1.0);
        let t = trials.max(1) as f64;
        violations as f64 / t <= b + 4.0 * (b * (1.0 - b) / t).sqrt()
    }

    /// Whether every violation rate passes [`Self::within_bound`] against its
    /// lemma's failure probability.
    pub fn all_within_bounds(&self) -> bool {
        let bp = &self.bound_probabilities;
        Self::within_bound(self.c_vector_violations, self.trials, bp.p1)
            && Self::within_bound(self.c_ratio_violations, self.trials, bp.p1)
            && Self::within_bound(self.theta_norm_violations, self.trials, bp.p2)
            && Self::within_bound(self.sigma_k_violations, self.trials, bp.p3)
    }
}

struct TrialStats {
    c_vector_violated: bool,
    c_ratio_violated: bool,
    theta_norm_ratio: f64,
    sigma_k_ratio: f64,
    c_sum_error: f64,
}

/// Samples `trials` independent Θ (trial `t` uses stream `t` of `base_seed`)
/// and counts violations of each concentration bound.
pub fn run_concentration_check(
    params: &MmsbParams,
    trials: usize,
    base_seed: u64,
) -> Result<ConcentrationReport> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let sv = singular_values(&params.b)?;
    let (u, l) = (sv[0], *sv.last().expect("k ≥ 2"));
    let n = params.n as f64;
    let k = params.k as f64;
    let scale = (2.0 * n / k).sqrt();
    let sigma_scale = l / (params.alpha * k + 1.0).sqrt() * scale;

    let stats: Vec<TrialStats> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<TrialStats> {
            let mut rng = stream(base_seed, t as u64);
            let theta = sample_theta(params, &mut rng);
            let c = theta.column_sums();
            let (lo, hi) = (0.9 * n / k, 1.1 * n / k);
            let c_min = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let c_max = c.iter().cloned().fold(0.0, f64::max);

            let gram = theta.as_matrix().t_matmul(theta.as_matrix())?;
            let top = top_k_eigs(&gram, 1, &EigenConfig::default(), &mut rng)?;
            let theta_norm = top.values[0].max(0.0).sqrt();

            // σ_k(ΘB)² is the smallest eigenvalue of Bᵀ(ΘᵀΘ)B.
            let inner = params.b.t_matmul(&gram.matmul(&params.b)?)?;
            let inner = DenseMatrix::from_fn(inner.rows(), inner.cols(), |i, j| {
                0.5 * (inner.get(i, j) + inner.get(j, i))
            });
            let (values, _) = symmetric_eigen(&inner);
            let sigma_k = values.last().copied().unwrap_or(0.0).max(0.0).sqrt();

            Ok(TrialStats {
                c_vector_violated: c_min < lo || c_max > hi,
                c_ratio_violated: c_min / c_max < 9.0 / 11.0,
                theta_norm_ratio: theta_norm / scale,
                sigma_k_ratio: sigma_k / sigma_scale,
                c_sum_error: (c.iter().sum::<f64>() - n).abs(),
            })
        })
        .collect::<Result<_>>()?;

    Ok(ConcentrationReport {
        trials,
        c_vector_violations: stats.iter().filter(|s| s.c_vector_violated).count(),
        c_ratio_violations: stats.iter().filter(|s| s.c_ratio_violated).count(),
        theta_norm_violations: stats.iter().filter(|s| s.theta_norm_ratio > 2.0).count(),
        sigma_k_violations: stats.iter().filter(|s| s.sigma_k_ratio < 0.25).count(),
        bound_probabilities: BoundProbabilities::new(params.n, params.k, params.alpha, l, u),
        max_c_sum_error: stats.iter().map(|s| s.c_sum_error).fold(0.0, f64::max),
        max_theta_norm_ratio: stats.iter().map(|s| s.theta_norm_ratio).fold(0.0, f64::max),
        min_sigma_k_ratio: stats
            .iter()
            .map(|s| s.sigma_k_ratio)
            .fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
#[path = "../tests/common/quadrature.rs"]
mod quadrature;
