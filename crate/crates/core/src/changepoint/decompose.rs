use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::ChangePointError;

pub const DEFAULT_PERIODS: [usize; 2] = [24, 168];
/// Harmonics fitted per period.
pub const HARMONICS: usize = 2;
/// Width of the centered moving average that extracts the trend.
pub const TREND_WINDOW: usize = 168;

/// `input = seasonal + trend + residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub seasonal: Vec<f64>,
    pub trend: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Harmonic regression for the seasonal part (intercept plus sine/cosine
/// pairs of each period), then a centered moving average of the
/// deseasonalized series for the trend. The average window is truncated at
/// both ends.
pub fn decompose(series: &[f64], periods: &[usize]) -> Result<Decomposition, ChangePointError> {
    let n = series.len();
    let longest = periods.iter().copied().max().unwrap_or(1);
    if periods.contains(&0) {
        return Err(ChangePointError::BadPeriod);
    }
    if n < 2 * longest || n < 2 {
        return Err(ChangePointError::TooShort {
            len: n,
            needed: (2 * longest).max(2),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(ChangePointError::NonFinite);
    }
    let p = 1 + 2 * HARMONICS * periods.len();
    let basis = |t: usize, out: &mut [f64]| {
        out[0] = 1.0;
        let mut c = 1;
        for &period in periods {
            for h in 1..=HARMONICS {
                let arg = TAU * (h * (t % period)) as f64 / period as f64;
                out[c] = libm::sin(arg);
                out[c + 1] = libm::cos(arg);
                c += 2;
            }
        }
    };
    let mut xtx = DMatrix::<f64>::zeros(p, p);
    let mut xty = DVector::<f64>::zeros(p);
    let mut row = vec![0.0; p];
    for (t, &y) in series.iter().enumerate() {
        basis(t, &mut row);
        for i in 0..p {
            xty[i] += row[i] * y;
            for j in i..p {
                xtx[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            xtx[(i, j)] = xtx[(j, i)];
        }
    }
    let beta = xtx
        .cholesky()
        .ok_or(ChangePointError::Singular)?
        .solve(&xty);
    let seasonal: Vec<f64> = (0..n)
        .map(|t| {
            basis(t, &mut row);
            (1..p).map(|i| row[i] * beta[i]).sum()
        })
        .collect();

    let mut prefix = vec![0.0; n + 1];
    for t in 0..n {
        prefix[t + 1] = prefix[t] + (series[t] - seasonal[t]);
    }
    let half = TREND_WINDOW / 2;
    let trend: Vec<f64> = (0..n)
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + TREND_WINDOW - half).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect();
    let residual = (0..n).map(|t| series[t] - seasonal[t] - trend[t]).collect();
    Ok(Decomposition {
        seasonal,
        trend,
        residual,
    })
}
