//! Trend change-point screening of training data: harmonic seasonal
//! decomposition, penalized piecewise-linear segmentation of the trend, and
//! the candidate training suffixes that start at each change point.

mod decompose;
mod detect;

use alloc::vec::Vec;

pub use decompose::{decompose, Decomposition, DEFAULT_PERIODS, HARMONICS, TREND_WINDOW};
pub use detect::{
    bic_penalty, detect_changepoints, detect_changepoints_with, estimate_noise_sigma,
    ChangePointReport, DetectConfig, SegmentCost, DEFAULT_MIN_SEGMENT,
};

use crate::stats;

/// Candidate subsets shorter than this many hours are flagged.
pub const MIN_TRAINING_HOURS: usize = 8760;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChangePointError {
    #[error("series of length {len} is shorter than the required {needed}")]
    TooShort { len: usize, needed: usize },
    #[error("penalty must be positive and finite, got {0}")]
    BadPenalty(f64),
    #[error("seasonal periods must be positive")]
    BadPeriod,
    #[error("non-finite value in series")]
    NonFinite,
    #[error("harmonic regression is singular")]
    Singular,
    #[error("change point {index} lies outside a series of length {len}")]
    OutOfRange { index: usize, len: usize },
}

/// One training suffix `start .. len` of the screened series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingCandidate {
    pub start: usize,
    pub len: usize,
    /// Shorter than [`MIN_TRAINING_HOURS`].
    pub short: bool,
}

/// The full series followed by one suffix per change point.
pub fn screen_training_data(
    len: usize,
    report: &ChangePointReport,
) -> Result<Vec<TrainingCandidate>, ChangePointError> {
    let mut out = Vec::with_capacity(report.indices.len() + 1);
    for start in core::iter::once(0).chain(report.indices.iter().copied()) {
        if start >= len {
            return Err(ChangePointError::OutOfRange { index: start, len });
        }
        let l = len - start;
        out.push(TrainingCandidate {
            start,
            len: l,
            short: l < MIN_TRAINING_HOURS,
        });
    }
    Ok(out)
}

/// Decomposes `series`, segments its trend with a BIC-style penalty based on
/// the residual spread (scaled by `penalty_scale`), and returns the
/// decomposition and report.
pub fn trend_changepoints(
    series: &[f64],
    penalty_scale: f64,
) -> Result<(Decomposition, ChangePointReport), ChangePointError> {
    let d = decompose(series, &DEFAULT_PERIODS)?;
    let sigma = stats::std_dev(&d.residual);
    let penalty = penalty_scale * bic_penalty(sigma, series.len());
    let penalty = if penalty > 0.0 {
        penalty
    } else {
        f64::MIN_POSITIVE
    };
    let report = detect_changepoints(&d.trend, penalty)?;
    Ok((d, report))
}
