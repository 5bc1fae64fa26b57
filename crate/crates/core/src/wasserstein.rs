//! One-dimensional Wasserstein distance and the score-distribution
//! similarity metric used to pick a model for reuse.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::fpca::ScoreSet;
use crate::series::BuildingId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WassersteinError {
    #[error("empty sample")]
    Empty,
    #[error("non-finite sample value")]
    NonFinite,
    #[error("score sets have {0} and {1} components")]
    ComponentMismatch(usize, usize),
    #[error("weights must be non-negative with a positive sum")]
    BadWeights,
    #[error("no candidates")]
    NoCandidates,
}

fn sorted(x: &[f64]) -> Result<Vec<f64>, WassersteinError> {
    if x.is_empty() {
        return Err(WassersteinError::Empty);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(WassersteinError::NonFinite);
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// W1 distance between two empirical distributions: the integral over
/// `u in (0, 1)` of `|Qa(u) - Qb(u)|`, with both quantile functions
/// piecewise constant on the merged grid of `i / n_a` and `j / n_b`.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64, WassersteinError> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len(), b.len());
    if na == nb {
        return Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / na as f64);
    }
    // Walk the merged breakpoints in integer units of 1 / (na * nb).
    let (mut i, mut j) = (0, 0);
    let (mut pos, mut total) = (0u128, 0.0);
    let (ua, ub) = (nb as u128, na as u128);
    while i < na && j < nb {
        let next_a = (i as u128 + 1) * ua;
        let next_b = (j as u128 + 1) * ub;
        let next = next_a.min(next_b);
        total += (next - pos) as f64 * (a[i] - b[j]).abs();
        pos = next;
        if next_a == next {
            i += 1;
        }
        if next_b == next {
            j += 1;
        }
    }
    Ok(total / (na as f64 * nb as f64))
}

/// Weighted W1 between the per-component score distributions of `a` and
/// `b`, with weights normalized to sum to one.
pub fn similarity_metric(
    a: &ScoreSet,
    b: &ScoreSet,
    weights: &[f64],
) -> Result<f64, WassersteinError> {
    let k = a.k();
    if b.k() != k || weights.len() != k {
        return Err(WassersteinError::ComponentMismatch(
            k,
            if b.k() != k { b.k() } else { weights.len() },
        ));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || !(sum > 0.0) {
        return Err(WassersteinError::BadWeights);
    }
    let mut total = 0.0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            total += w / sum * wasserstein_1d(&a.component(i), &b.component(i))?;
        }
    }
    Ok(total)
}

/// Candidate with the smallest metric to `target`; ties go to the lowest id.
pub fn select_reuse_model(
    target: &ScoreSet,
    candidates: &BTreeMap<BuildingId, ScoreSet>,
    weights: &[f64],
) -> Result<(BuildingId, f64), WassersteinError> {
    let mut best: Option<(BuildingId, f64)> = None;
    for (id, set) in candidates {
        let d = similarity_metric(target, set, weights)?;
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((*id, d));
        }
    }
    best.ok_or(WassersteinError::NoCandidates)
}

/// Pairwise metric matrix in id order.
pub fn similarity_matrix(
    sets: &BTreeMap<BuildingId, ScoreSet>,
    weights: &[f64],
) -> Result<(Vec<BuildingId>, Vec<Vec<f64>>), WassersteinError> {
    let ids: Vec<BuildingId> = sets.keys().copied().collect();
    let mut m = alloc::vec![alloc::vec![0.0; ids.len()]; ids.len()];
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let d = similarity_metric(&sets[&ids[i]], &sets[&ids[j]], weights)?;
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    Ok((ids, m))
}
