//! Functional PCA of daily 24-hour load profiles.

use alloc::vec::Vec;

use nalgebra::{SMatrix, SymmetricEigen};

use crate::series::TimeSeries;

pub const PROFILE_LEN: usize = 24;
/// Cumulative explained-variance share targeted by [`choose_k`].
pub const DEFAULT_VARIANCE_SHARE: f64 = 0.9;
pub const MAX_DEFAULT_COMPONENTS: usize = 5;

pub type Profile = [f64; PROFILE_LEN];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FpcaError {
    #[error("need at least 2 complete days, found {0}")]
    TooFewDays(usize),
    #[error("profiles must be hourly")]
    NotHourly,
    #[error("k = {k} must satisfy 1 <= k < number of days ({days}) and k <= 24")]
    BadK { k: usize, days: usize },
    #[error("non-finite profile value")]
    NonFinite,
}

/// Complete midnight-to-midnight days of an hourly series. With `normalize`
/// each day is divided by its maximum (days whose maximum is not positive
/// are left unchanged).
pub fn extract_daily_profiles(
    series: &TimeSeries,
    normalize: bool,
) -> Result<Vec<Profile>, FpcaError> {
    if series.step_hours() != 1.0 {
        return Err(FpcaError::NotHourly);
    }
    let first = (0..series.len().min(PROFILE_LEN)).find(|&i| series.hour_of_day(i) == 0);
    let values = series.values();
    let mut out = Vec::new();
    if let Some(start) = first {
        for day in values[start..].chunks_exact(PROFILE_LEN) {
            let mut p: Profile = day.try_into().expect("chunk of 24");
            if normalize {
                let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if max > 0.0 {
                    p.iter_mut().for_each(|v| *v /= max);
                }
            }
            out.push(p);
        }
    }
    if out.len() < 2 {
        return Err(FpcaError::TooFewDays(out.len()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FpcaModel {
    pub mean: Profile,
    /// Orthonormal components, largest explained variance first.
    pub components: Vec<Profile>,
    pub explained_variance: Vec<f64>,
    /// Sum of all 24 eigenvalues of the sample covariance.
    pub total_variance: f64,
}

/// Per-profile component scores, one row per profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub scores: Vec<Vec<f64>>,
}

impl ScoreSet {
    pub fn k(&self) -> usize {
        self.scores.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Scores of component `i` across all profiles.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.scores.iter().map(|r| r[i]).collect()
    }
}

type Mat24 = SMatrix<f64, PROFILE_LEN, PROFILE_LEN>;

fn eigen(profiles: &[Profile]) -> Result<(Profile, Vec<(f64, Profile)>), FpcaError> {
    if profiles.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FpcaError::NonFinite);
    }
    let n = profiles.len();
    let mut mean = [0.0; PROFILE_LEN];
    for p in profiles {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v / n as f64;
        }
    }
    let mut cov = Mat24::zeros();
    for p in profiles {
        for i in 0..PROFILE_LEN {
            let di = p[i] - mean[i];
            for j in i..PROFILE_LEN {
                cov[(i, j)] += di * (p[j] - mean[j]);
            }
        }
    }
    for i in 0..PROFILE_LEN {
        for j in i..PROFILE_LEN {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut pairs: Vec<(f64, Profile)> = (0..PROFILE_LEN)
        .map(|c| {
            let mut v: Profile = core::array::from_fn(|i| eig.eigenvectors[(i, c)]);
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[c].max(0.0), v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok((mean, pairs))
}

/// Mean profile and the top `k` eigenvectors of the sample covariance. Each
/// component's largest-magnitude entry is positive.
pub fn fit_fpca(profiles: &[Profile], k: usize) -> Result<FpcaModel, FpcaError> {
    if k == 0 || k >= profiles.len() || k > PROFILE_LEN {
        return Err(FpcaError::BadK {
            k,
            days: profiles.len(),
        });
    }
    let (mean, pairs) = eigen(profiles)?;
    let total_variance = pairs.iter().map(|p| p.0).sum();
    let (explained_variance, components) = pairs.into_iter().take(k).unzip();
    Ok(FpcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
    })
}

/// Smallest `k` whose components explain at least `share` of the variance,
/// capped at `cap` and at `n_days - 1`.
pub fn choose_k(profiles: &[Profile], share: f64, cap: usize) -> Result<usize, FpcaError> {
    if profiles.len() < 2 {
        return Err(FpcaError::TooFewDays(profiles.len()));
    }
    let (_, pairs) = eigen(profiles)?;
    let total: f64 = pairs.iter().map(|p| p.0).sum();
    let limit = cap.min(profiles.len() - 1).clamp(1, PROFILE_LEN);
    if total <= 0.0 {
        return Ok(1);
    }
    let mut acc = 0.0;
    for (i, (v, _)) in pairs.iter().enumerate().take(limit) {
        acc += v;
        if acc >= share * total {
            return Ok(i + 1);
        }
    }
    Ok(limit)
}

impl FpcaModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// `alpha_i = nu_i . (x - mu)` for every profile.
    pub fn transform(&self, profiles: &[Profile]) -> ScoreSet {
        let scores = profiles
            .iter()
            .map(|p| {
                self.components
                    .iter()
                    .map(|c| {
                        c.iter()
                            .zip(p.iter().zip(&self.mean))
                            .map(|(c, (x, m))| c * (x - m))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        ScoreSet { scores }
    }

    /// `mu + sum_i alpha_i nu_i` for every score row.
    pub fn reconstruct(&self, scores: &ScoreSet) -> Vec<Profile> {
        scores
            .scores
            .iter()
            .map(|row| {
                let mut p = self.mean;
                for (a, c) in row.iter().zip(&self.components) {
                    for (x, v) in p.iter_mut().zip(c) {
                        *x += a * v;
                    }
                }
                p
            })
            .collect()
    }

    /// Explained-variance shares of the retained components; all equal when
    /// there is no variance.
    pub fn variance_weights(&self) -> Vec<f64> {
        let sum: f64 = self.explained_variance.iter().sum();
        if sum > 0.0 {
            self.explained_variance.iter().map(|v| v / sum).collect()
        } else {
            alloc::vec![1.0 / self.k() as f64; self.k()]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use alloc::vec;
    use rand::Rng;

    fn random_profiles(n: usize, seed: u64) -> Vec<Profile> {
        let mut r = rng::stream(seed, 0);
        (0..n)
            .map(|_| {
                core::array::from_fn(|h| {
                    1.0 + libm::sin(h as f64 / 4.0) + r.random_range(-0.5..0.5)
                })
            })
            .collect()
    }

    #[test]
    fn daily_extraction() {
        let s = TimeSeries::hourly(0, (0..48).map(f64::from).collect()).unwrap();
        let days = extract_daily_profiles(&s, false).unwrap();
        assert_eq!(days.len(), 2);
        assert_eq!(days[1][0], 24.0);
        let normalized = extract_daily_profiles(&s, true).unwrap();
        assert_eq!(normalized[0][23], 1.0);
        let short = TimeSeries::hourly(0, vec![1.0; 30]).unwrap();
        assert_eq!(
            extract_daily_profiles(&short, false),
            Err(FpcaError::TooFewDays(1))
        );
        // starts at 18:00: the first six hours are skipped
        let offset = TimeSeries::hourly(18, (0..60).map(f64::from).collect()).unwrap();
        let days = extract_daily_profiles(&offset, false).unwrap();
        assert_eq!(days.len(), 2);
        assert_eq!(days[0][0], 6.0);
    }

    #[test]
    fn identical_profiles_have_no_variance() {
        let p = [[2.0; 24]; 5];
        let m = fit_fpca(&p, 2).unwrap();
        assert_eq!(m.explained_variance, vec![0.0, 0.0]);
        assert!(m.transform(&p).scores.iter().flatten().all(|s| *s == 0.0));
    }

    #[test]
    fn rank_one_construction() {
        let mu: Profile = core::array::from_fn(|h| 1.0 + h as f64 * 0.1);
        let mut nu: Profile = core::array::from_fn(|h| libm::cos(h as f64));
        let norm = libm::sqrt(nu.iter().map(|v| v * v).sum::<f64>());
        nu.iter_mut().for_each(|v| *v /= norm);
        let a = 0.7;
        let profiles: Vec<Profile> = [a, -a, a, -a]
            .iter()
            .map(|s| core::array::from_fn(|h| mu[h] + s * nu[h]))
            .collect();
        let m = fit_fpca(&profiles, 2).unwrap();
        assert!(m.explained_variance[0] > 0.0);
        assert!(m.explained_variance[1] < 1e-12);
        let dot: f64 = m.components[0].iter().zip(&nu).map(|(x, y)| x * y).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-10);
        let scores = m.transform(&profiles).component(0);
        for (s, sign) in scores.iter().zip([1.0, -1.0, 1.0, -1.0]) {
            assert!((s.abs() - a).abs() < 1e-10);
            assert!((s * sign * dot.signum() - a).abs() < 1e-10);
        }
    }

    #[test]
    fn full_basis_reconstruction_and_orthonormality() {
        let p = random_profiles(40, 3);
        let m = fit_fpca(&p, 24).unwrap();
        for i in 0..24 {
            for j in 0..24 {
                let g: f64 = m.components[i]
                    .iter()
                    .zip(&m.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
        assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
        let total: f64 = m.explained_variance.iter().sum();
        assert!((total - m.total_variance).abs() <= 1e-8 * m.total_variance);
        let scores = m.transform(&p);
        for (orig, rec) in p.iter().zip(m.reconstruct(&scores)) {
            for (a, b) in orig.iter().zip(&rec) {
                assert!((a - b).abs() < 1e-8);
            }
        }
        for c in 0..24 {
            let mean: f64 = scores.component(c).iter().sum::<f64>() / 40.0;
            assert!(mean.abs() < 1e-9);
        }
        assert!(m.transform(&[m.mean]).scores[0]
            .iter()
            .all(|s| s.abs() < 1e-12));
        for c in &m.components {
            let lead = c
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn k_selection() {
        let p = random_profiles(30, 1);
        let k = choose_k(&p, DEFAULT_VARIANCE_SHARE, MAX_DEFAULT_COMPONENTS).unwrap();
        assert!((1..=5).contains(&k));
        assert_eq!(fit_fpca(&p, 30), Err(FpcaError::BadK { k: 30, days: 30 }));
        assert_eq!(fit_fpca(&p, 0), Err(FpcaError::BadK { k: 0, days: 30 }));
    }
}
