//! Scoring recovered memberships against ground truth, and turning fractional
//! memberships into (merged) complexes.

use std::collections::BTreeSet;
use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Exhaustive permutation search is used up to this many communities;
/// beyond it, bottleneck assignment.
pub const EXHAUSTIVE_MAX_K: usize = 8;

pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_MERGE_THRESHOLD: f64 = 0.8;

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationResult {
    /// `max_j ‖θ̂_j − θ_π(j)‖_∞` under the best permutation.
    pub error: f64,
    /// Estimated column `j` is matched to true column `permutation[j]`.
    pub permutation: Vec<usize>,
    pub per_column_errors: Vec<f64>,
}

/// Permutation-matched entrywise error `min_Π ‖Θ̂ − ΘΠ‖_max`.
pub fn entrywise_error(theta_hat: &DenseMatrix, theta: &DenseMatrix) -> Result<EvaluationResult> {
    if theta_hat.rows() != theta.rows() || theta_hat.cols() != theta.cols() {
        return Err(Error::invalid(format!(
            "shape mismatch: {}x{} vs {}x{}",
            theta_hat.rows(),
            theta_hat.cols(),
            theta.rows(),
            theta.cols()
        )));
    }
    let k = theta.cols();
    if k == 0 {
        return Ok(EvaluationResult {
            error: 0.0,
            permutation: Vec::new(),
            per_column_errors: Vec::new(),
        });
    }
    let cost = column_cost(theta_hat, theta);
    let permutation = if k <= EXHAUSTIVE_MAX_K {
        best_permutation_exhaustive(&cost)
    } else {
        bottleneck_assignment(&cost)
    };
    let per_column_errors: Vec<f64> = permutation
        .iter()
        .enumerate()
        .map(|(j, &l)| cost[j][l])
        .collect();
    let error = per_column_errors.iter().cloned().fold(0.0, f64::max);
    Ok(EvaluationResult {
        error,
        permutation,
        per_column_errors,
    })
}

/// `C[j][l] = ‖θ̂_j − θ_l‖_∞`.
fn column_cost(theta_hat: &DenseMatrix, theta: &DenseMatrix) -> Vec<Vec<f64>> {
    let k = theta.cols();
    let mut cost = vec![vec![0.0f64; k]; k];
    for i in 0..theta.rows() {
        let est = theta_hat.row(i);
        let truth = theta.row(i);
        for (j, &e) in est.iter().enumerate() {
            for (l, &t) in truth.iter().enumerate() {
                let d = (e - t).abs();
                if d > cost[j][l] {
                    cost[j][l] = d;
                }
            }
        }
    }
    cost
}

/// Lexicographically first permutation minimizing the max matched cost.
fn best_permutation_exhaustive(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_val = f64::INFINITY;
    loop {
        let val = perm
            .iter()
            .enumerate()
            .map(|(j, &l)| cost[j][l])
            .fold(0.0, f64::max);
        if val < best_val {
            best_val = val;
            best.clone_from(&perm);
        }
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Min-max assignment: binary search over the distinct costs, checking for a
/// perfect matching using only edges at or below the candidate threshold.
fn bottleneck_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    let mut values: Vec<f64> = cost.iter().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let (mut lo, mut hi) = (0usize, values.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(cost, values[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    perfect_matching(cost, values[lo]).expect("the largest cost admits every edge")
        .into_iter()
        .take(k)
        .collect()
}

/// Kuhn's augmenting-path matching of rows to columns over edges with
/// `cost ≤ limit`; returns the column assigned to each row.
fn perfect_matching(cost: &[Vec<f64>], limit: f64) -> Option<Vec<usize>> {
    let k = cost.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; k];

    fn augment(
        row: usize,
        cost: &[Vec<f64>],
        limit: f64,
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..cost.len() {
            if cost[row][col] > limit || seen[col] {
                continue;
            }
            seen[col] = true;
            let free = match col_owner[col] {
                None => true,
                Some(other) => augment(other, cost, limit, seen, col_owner),
            };
            if free {
                col_owner[col] = Some(row);
                return true;
            }
        }
        false
    }

    for row in 0..k {
        let mut seen = vec![false; k];
        if !augment(row, cost, limit, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut assignment = vec![0; k];
    for (col, owner) in col_owner.iter().enumerate() {
        assignment[owner.expect("perfect matching")] = col;
    }
    Some(assignment)
}

/// Node-index sets, one per detected complex.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ComplexSet {
    pub complexes: Vec<BTreeSet<usize>>,
    /// Number of original complexes unioned into each entry.
    pub merged_from: Vec<usize>,
}

impl ComplexSet {
    pub fn len(&self) -> usize {
        self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complexes.is_empty()
    }
}

/// Complex `j` is `{i : θ̂_ij ≥ threshold}`; empty complexes are dropped.
pub fn binarize(theta_hat: &DenseMatrix, threshold: f64) -> ComplexSet {
    let mut out = ComplexSet::default();
    for j in 0..theta_hat.cols() {
        let members: BTreeSet<usize> = (0..theta_hat.rows())
            .filter(|&i| theta_hat.get(i, j) >= threshold)
            .collect();
        if !members.is_empty() {
            out.complexes.push(members);
            out.merged_from.push(1);
        }
    }
    out
}

/// `|A∩B|² / (|A|·|B|)`; zero if either set is empty.
pub fn overlap_score(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let common = a.intersection(b).count() as f64;
    common * common / (a.len() as f64 * b.len() as f64)
}

/// Repeatedly unions the pair with the highest overlap score at or above
/// `threshold` (ties: lowest index pair) until no pair qualifies.
pub fn merge_complexes(cs: &ComplexSet, threshold: f64) -> Result<ComplexSet> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!(
            "overlap threshold {threshold} must lie in (0, 1]"
        )));
    }
    let mut complexes: Vec<BTreeSet<usize>> = cs
        .complexes
        .iter()
        .filter(|c| !c.is_empty())
        .cloned()
        .collect();
    let mut merged_from: Vec<usize> = cs
        .complexes
        .iter()
        .zip(&cs.merged_from)
        .filter(|(c, _)| !c.is_empty())
        .map(|(_, &m)| m)
        .collect();

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..complexes.len() {
            for b in a + 1..complexes.len() {
                let w = overlap_score(&complexes[a], &complexes[b]);
                if w >= threshold && best.map_or(true, |(_, _, bw)| w > bw) {
                    best = Some((a, b, w));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        let absorbed = complexes.remove(b);
        let count = merged_from.remove(b);
        complexes[a].extend(absorbed);
        merged_from[a] += count;
    }
    Ok(ComplexSet {
        complexes,
        merged_from,
    })
}

/// One complex per line, member names separated by single tabs, LF endings.
pub fn write_complexes<W: Write>(cs: &ComplexSet, names: &[String], mut out: W) -> Result<()> {
    for complex in &cs.complexes {
        let mut first = true;
        for &i in complex {
            let name = names
                .get(i)
                .ok_or_else(|| Error::invalid(format!("node {i} has no name")))?;
            if !first {
                out.write_all(b"\t")?;
            }
            out.write_all(name.as_bytes())?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
