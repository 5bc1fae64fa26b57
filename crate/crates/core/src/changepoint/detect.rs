use alloc::vec;
use alloc::vec::Vec;

use super::ChangePointError;

pub const DEFAULT_MIN_SEGMENT: usize = 168;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    /// Cost added per segment; must be positive.
    pub penalty: f64,
    pub min_segment: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChangePointReport {
    /// Start index of every segment after the first, increasing.
    pub indices: Vec<usize>,
    /// Drop in fitted SSE from splitting at each index, given its neighbours.
    pub scores: Vec<f64>,
    /// Optimal penalized cost.
    pub cost: f64,
}

/// SSE of least-squares lines over ranges of one series, in O(1) per range.
pub struct SegmentCost {
    y: Vec<f64>,
    ty: Vec<f64>,
    yy: Vec<f64>,
}

impl SegmentCost {
    pub fn new(series: &[f64]) -> Self {
        let n = series.len();
        let centre = series.iter().sum::<f64>() / n.max(1) as f64;
        let (mut y, mut ty, mut yy) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
        for (t, v) in series.iter().enumerate() {
            let c = v - centre;
            y[t + 1] = y[t] + c;
            ty[t + 1] = ty[t] + t as f64 * c;
            yy[t + 1] = yy[t] + c * c;
        }
        Self { y, ty, yy }
    }

    /// SSE of the best line through `series[s..e]`.
    pub fn cost(&self, s: usize, e: usize) -> f64 {
        let m = (e - s) as f64;
        if e - s < 3 {
            return 0.0;
        }
        let sy = self.y[e] - self.y[s];
        let syy = self.yy[e] - self.yy[s] - sy * sy / m;
        let su = m * (m - 1.0) / 2.0;
        let suy = self.ty[e] - self.ty[s] - s as f64 * sy;
        let sxx = m * (m * m - 1.0) / 12.0;
        let sxy = suy - su * sy / m;
        (syy - sxy * sxy / sxx).max(0.0)
    }
}

/// `2 sigma^2 ln n`.
pub fn bic_penalty(sigma: f64, n: usize) -> f64 {
    2.0 * sigma * sigma * libm::log(n.max(2) as f64)
}

/// Noise level from the median absolute deviation of first differences.
pub fn estimate_noise_sigma(series: &[f64]) -> f64 {
    if series.len() < 3 {
        return 0.0;
    }
    let mut d: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let med = median(&mut d);
    let mut dev: Vec<f64> = d.iter().map(|x| (x - med).abs()).collect();
    1.482_602_218_505_602 * median(&mut dev) / core::f64::consts::SQRT_2
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Penalized piecewise-linear segmentation with the default minimum
/// segment length.
pub fn detect_changepoints(
    series: &[f64],
    penalty: f64,
) -> Result<ChangePointReport, ChangePointError> {
    detect_changepoints_with(
        series,
        &DetectConfig {
            penalty,
            min_segment: DEFAULT_MIN_SEGMENT,
        },
    )
}

/// Exact minimizer of `sum(segment SSE) + penalty * segments` over all
/// segmentations whose segments are at least `min_segment` long, by optimal
/// partitioning with PELT pruning.
pub fn detect_changepoints_with(
    series: &[f64],
    cfg: &DetectConfig,
) -> Result<ChangePointReport, ChangePointError> {
    let n = series.len();
    if !(cfg.penalty > 0.0 && cfg.penalty.is_finite()) {
        return Err(ChangePointError::BadPenalty(cfg.penalty));
    }
    if n < 10 {
        return Err(ChangePointError::TooShort { len: n, needed: 10 });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(ChangePointError::NonFinite);
    }
    let min_seg = cfg.min_segment.max(1);
    let cost = SegmentCost::new(series);
    if n < 2 * min_seg {
        return Ok(ChangePointReport {
            indices: Vec::new(),
            scores: Vec::new(),
            cost: cost.cost(0, n) + cfg.penalty,
        });
    }
    let beta = cfg.penalty;
    let mut f = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    f[0] = 0.0;
    let mut candidates: Vec<usize> = Vec::new();
    for t in min_seg..=n {
        let s_new = t - min_seg;
        if f[s_new].is_finite() {
            candidates.push(s_new);
        }
        let mut best = f64::INFINITY;
        let mut arg = 0;
        let mut values = Vec::with_capacity(candidates.len());
        for &s in &candidates {
            let v = f[s] + cost.cost(s, t) + beta;
            values.push(v);
            if v < best {
                best = v;
                arg = s;
            }
        }
        f[t] = best;
        last[t] = arg;
        let mut k = 0;
        candidates.retain(|_| {
            let keep = values[k] - beta <= best;
            k += 1;
            keep
        });
    }
    let mut indices = Vec::new();
    let mut t = n;
    while t > 0 {
        let s = last[t];
        if s > 0 {
            indices.push(s);
        }
        t = s;
    }
    indices.reverse();
    let scores = indices
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let prev = if k == 0 { 0 } else { indices[k - 1] };
            let next = indices.get(k + 1).copied().unwrap_or(n);
            cost.cost(prev, next) - cost.cost(prev, c) - cost.cost(c, next)
        })
        .collect();
    Ok(ChangePointReport {
        indices,
        scores,
        cost: f[n],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noisy_steps(n: usize, steps: &[(usize, f64)], sigma: f64, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, 5);
        (0..n)
            .map(|t| {
                let level: f64 = steps
                    .iter()
                    .filter(|(at, _)| t >= *at)
                    .map(|(_, h)| h)
                    .sum();
                level + sigma * Distribution::<f64>::sample(&StandardNormal, &mut r)
            })
            .collect::<Vec<f64>>()
    }

    #[test]
    fn segment_cost_matches_direct_fit() {
        let mut r = rng::stream(1, 1);
        let y: Vec<f64> = (0..200)
            .map(|t| 1e3 + 0.5 * t as f64 + r.random_range(-3.0..3.0))
            .collect();
        let c = SegmentCost::new(&y);
        for (s, e) in [(0, 200), (13, 77), (150, 153)] {
            let m = (e - s) as f64;
            let xs: Vec<f64> = (s..e).map(|t| t as f64).collect();
            let xm = xs.iter().sum::<f64>() / m;
            let ym = y[s..e].iter().sum::<f64>() / m;
            let sxy: f64 = xs
                .iter()
                .zip(&y[s..e])
                .map(|(x, y)| (x - xm) * (y - ym))
                .sum();
            let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
            let b = sxy / sxx;
            let sse: f64 = xs
                .iter()
                .zip(&y[s..e])
                .map(|(x, y)| (y - ym - b * (x - xm)).powi(2))
                .sum();
            assert!((c.cost(s, e) - sse).abs() < 1e-6 * sse.max(1.0), "{s}..{e}");
        }
    }

    #[test]
    fn single_shift_is_localized() {
        let y = noisy_steps(2000, &[(1000, 5.0)], 1.0, 3);
        let beta = bic_penalty(estimate_noise_sigma(&y), y.len());
        let r = detect_changepoints(&y, beta).unwrap();
        assert_eq!(r.indices.len(), 1, "{:?}", r.indices);
        assert!(r.indices[0].abs_diff(1000) <= 50);
        assert!(r.scores[0] > 0.0);
    }

    #[test]
    fn two_shifts_and_large_penalty() {
        let y = noisy_steps(3000, &[(800, 4.0), (2100, -6.0)], 0.5, 8);
        let r = detect_changepoints(&y, 4.0 * bic_penalty(0.5, 3000)).unwrap();
        assert_eq!(r.indices.len(), 2, "{:?} {:?}", r.indices, r.scores);
        assert!(r.indices[0].abs_diff(800) <= 50 && r.indices[1].abs_diff(2100) <= 50);
        let flat = noisy_steps(1000, &[], 1.0, 2);
        assert!(detect_changepoints(&flat, 1e9).unwrap().indices.is_empty());
        assert!(matches!(
            detect_changepoints(&flat, 0.0),
            Err(ChangePointError::BadPenalty(_))
        ));
    }

    #[test]
    fn larger_penalty_keeps_a_subset() {
        let y = noisy_steps(2400, &[(500, 2.0), (1200, 6.0), (1900, -1.0)], 0.7, 4);
        let mut prev: Option<Vec<usize>> = None;
        for beta in [5.0, 50.0, 500.0, 5_000.0, 50_000.0] {
            let r = detect_changepoints(&y, beta).unwrap();
            if let Some(p) = &prev {
                assert!(
                    r.indices.iter().all(|i| p.contains(i)),
                    "{beta}: {:?} vs {p:?}",
                    r.indices
                );
            }
            prev = Some(r.indices);
        }
    }

    /// Exhaustive search over at most two splits.
    fn brute(y: &[f64], cfg: &DetectConfig) -> (f64, Vec<usize>) {
        let c = SegmentCost::new(y);
        let n = y.len();
        let m = cfg.min_segment;
        let mut best = (c.cost(0, n) + cfg.penalty, vec![]);
        for a in m..=n.saturating_sub(m) {
            let v = c.cost(0, a) + c.cost(a, n) + 2.0 * cfg.penalty;
            if v < best.0 {
                best = (v, vec![a]);
            }
            for b in a + m..=n.saturating_sub(m) {
                let v = c.cost(0, a) + c.cost(a, b) + c.cost(b, n) + 3.0 * cfg.penalty;
                if v < best.0 {
                    best = (v, vec![a, b]);
                }
            }
        }
        best
    }

    #[test]
    fn matches_exhaustive_search_on_small_series() {
        for seed in 0..20 {
            let mut r = rng::stream(seed, 9);
            let n = r.random_range(60..150);
            let a = r.random_range(20..n - 20);
            let y = noisy_steps(n, &[(a, r.random_range(-5.0..5.0))], 1.0, seed);
            let cfg = DetectConfig {
                penalty: r.random_range(2.0..40.0),
                min_segment: 20,
            };
            let dp = detect_changepoints_with(&y, &cfg).unwrap();
            if dp.indices.len() <= 2 {
                let (cost, idx) = brute(&y, &cfg);
                assert!(
                    (dp.cost - cost).abs() <= 1e-9 * cost.abs().max(1.0),
                    "seed {seed}"
                );
                assert_eq!(dp.indices, idx, "seed {seed}");
            }
        }
    }
}
