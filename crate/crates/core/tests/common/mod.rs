//! Shared test support: an LP oracle by vertex enumeration, random LP
//! generators, planted-membership constructors, and the quadrature oracle.

#![allow(dead_code)]

pub mod quadrature;

use rand::Rng;
use rand_distr::StandardNormal;
use splp::linalg::DenseMatrix;
use splp::mmsb::sample_dirichlet_row;
use splp::LpStatus;

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        d *= m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for j in col..n {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    d
}

fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, size, &mut Vec::new(), &mut out);
    out
}

/// `min cᵀy s.t. Ay ≥ b` with `A` of full column rank, by enumerating every
/// basic solution (vertices) and every extreme ray of `{d : Ad ≥ 0}`.
/// Returns the status and the optimal objective (±∞ otherwise).
pub fn lp_oracle(a: &DenseMatrix, b: &[f64], c: &[f64]) -> (LpStatus, f64) {
    let (m, r) = (a.rows(), a.cols());
    let scale = a.max_abs().max(1.0);
    let feas_tol = 1e-9 * scale.max(b.iter().fold(1.0f64, |s, v| s.max(v.abs())));

    // Vertices: r linearly independent tight rows, solved by Cramer's rule.
    let mut best: Option<f64> = None;
    for s in subsets(m, r) {
        let sub: Vec<Vec<f64>> = s.iter().map(|&i| a.row(i).to_vec()).collect();
        let d = det(sub.clone());
        if d.abs() <= 1e-9 * scale.powi(r as i32) {
            continue;
        }
        let y: Vec<f64> = (0..r)
            .map(|j| {
                let mut mj = sub.clone();
                for (t, &i) in s.iter().enumerate() {
                    mj[t][j] = b[i];
                }
                det(mj) / d
            })
            .collect();
        let feasible = (0..m).all(|i| {
            let lhs: f64 = a.row(i).iter().zip(&y).map(|(p, q)| p * q).sum();
            lhs >= b[i] - feas_tol * (1.0 + y.iter().fold(0.0f64, |s, v| s.max(v.abs())))
        });
        if feasible {
            let obj: f64 = c.iter().zip(&y).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(obj, |v: f64| v.min(obj)));
        }
    }
    let Some(best) = best else {
        return (LpStatus::Infeasible, f64::INFINITY);
    };

    // Extreme rays: directions in the null space of r − 1 rows, taken by the
    // generalized cross product (signed minors).
    for s in subsets(m, r - 1) {
        let d: Vec<f64> = (0..r)
            .map(|j| {
                let minor: Vec<Vec<f64>> = s
                    .iter()
                    .map(|&i| (0..r).filter(|&t| t != j).map(|t| a.get(i, t)).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * det(minor)
            })
            .collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-9 {
            continue;
        }
        for sign in [1.0, -1.0] {
            let dir: Vec<f64> = d.iter().map(|v| sign * v / norm).collect();
            let in_cone = (0..m).all(|i| {
                a.row(i).iter().zip(&dir).map(|(p, q)| p * q).sum::<f64>() >= -1e-9 * scale
            });
            let descent: f64 = c.iter().zip(&dir).map(|(p, q)| p * q).sum();
            if in_cone && descent < -1e-9 {
                return (LpStatus::Unbounded, f64::NEG_INFINITY);
            }
        }
    }
    (LpStatus::Optimal, best)
}

/// Which status a random LP is built to favor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpFlavor {
    Bounded,
    Infeasible,
    Free,
}

/// A random `m×r` instance (`1 ≤ r ≤ 3`, `r ≤ m ≤ 8`). Half use small
/// integers (which produce degenerate vertices), half Gaussian entries.
pub fn random_lp<R: Rng>(rng: &mut R, flavor: LpFlavor) -> (DenseMatrix, Vec<f64>, Vec<f64>) {
    let r = rng.gen_range(1..=3);
    let m = rng.gen_range(r.max(2)..=8);
    let integer = rng.gen_bool(0.5);
    let entry = |rng: &mut R| -> f64 {
        if integer {
            rng.gen_range(-4i32..=4) as f64
        } else {
            rng.sample::<f64, _>(StandardNormal)
        }
    };
    let mut a = DenseMatrix::from_fn(m, r, |_, _| 0.0);
    // Redraw until A has full column rank.
    loop {
        for i in 0..m {
            for j in 0..r {
                a.set(i, j, entry(rng));
            }
        }
        let gram: Vec<Vec<f64>> = (0..r)
            .map(|p| (0..r).map(|q| (0..m).map(|i| a.get(i, p) * a.get(i, q)).sum()).collect())
            .collect();
        if det(gram) > 1e-6 {
            break;
        }
    }
    let y0: Vec<f64> = (0..r).map(|_| entry(rng)).collect();
    let mut b: Vec<f64> = (0..m)
        .map(|i| {
            let ay: f64 = a.row(i).iter().zip(&y0).map(|(p, q)| p * q).sum();
            let slack = if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..3.0f64).round() };
            ay - slack
        })
        .collect();
    let c: Vec<f64> = match flavor {
        LpFlavor::Bounded | LpFlavor::Infeasible => {
            // c = Aᵀu with u ≥ 0 keeps the dual feasible, so a feasible
            // instance has a finite optimum.
            let u: Vec<f64> = (0..m)
                .map(|_| if rng.gen_bool(0.5) { 0.0 } else { entry(rng).abs() })
                .collect();
            (0..r).map(|j| (0..m).map(|i| a.get(i, j) * u[i]).sum()).collect()
        }
        LpFlavor::Free => (0..r).map(|_| entry(rng)).collect(),
    };
    if flavor == LpFlavor::Infeasible {
        // Rows i and i' = −row i with b_i + b_i' > 0 contradict each other.
        let i = rng.gen_range(0..m - 1);
        let gap = 1.0 + rng.gen_range(0..3) as f64;
        for j in 0..r {
            a.set(m - 1, j, -a.get(i, j));
        }
        b[m - 1] = -b[i] + gap;
    }
    (a, b, c)
}

/// A Θ with a planted exactly-pure row for community `s` at `pure[s]`;
/// other rows are Dirichlet(α) draws with every entry below `max_entry`.
pub fn planted_theta<R: Rng>(
    n: usize,
    k: usize,
    alpha: f64,
    pure: &[usize],
    max_entry: f64,
    rng: &mut R,
) -> DenseMatrix {
    let mut t = DenseMatrix::zeros(n, k);
    for i in 0..n {
        if let Some(s) = pure.iter().position(|&p| p == i) {
            t.set(i, s, 1.0);
        } else {
            loop {
                sample_dirichlet_row(alpha, t.row_mut(i), rng);
                if t.row(i).iter().all(|&v| v < max_entry) {
                    break;
                }
            }
        }
    }
    t
}

/// Moves row `i` (assumed to be `e_s`) to the near-pure point
/// `(1 − η)e_s + η·v` for a random point `v` of the simplex, so the row stays
/// stochastic and is within `η` of the corner entrywise.
pub fn perturb_pure_row<R: Rng>(t: &mut DenseMatrix, i: usize, s: usize, eta: f64, rng: &mut R) {
    let k = t.cols();
    let mut v = vec![0.0; k];
    sample_dirichlet_row(1.0, &mut v, rng);
    for j in 0..k {
        let corner = if j == s { 1.0 } else { 0.0 };
        t.set(i, j, (1.0 - eta) * corner + eta * v[j]);
    }
}

/// A random symmetric `k×k` matrix with entries in `[lo, 1]` and unit
/// diagonal dominance, so it is comfortably full rank.
pub fn random_interaction<R: Rng>(k: usize, rng: &mut R) -> DenseMatrix {
    let mut b = DenseMatrix::zeros(k, k);
    for i in 0..k {
        b.set(i, i, rng.gen_range(0.7..1.0));
        for j in i + 1..k {
            let v = rng.gen_range(0.0..0.3 / k as f64);
            b.set(i, j, v);
            b.set(j, i, v);
        }
    }
    b
}
