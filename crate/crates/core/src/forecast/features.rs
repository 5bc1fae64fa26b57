use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use super::ForecastError;
use crate::series::{ScenarioDataset, Variable};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    pub name: String,
    /// Pearson correlation with the target over the ranking range.
    pub correlation: f64,
}

/// Every other series of `ds`, ranked by absolute Pearson correlation with
/// `target` over `range` (ties keep name order). Constant series rank with
/// correlation 0.
pub fn rank_features(
    ds: &ScenarioDataset,
    target: Variable,
    range: Range<usize>,
) -> Result<Vec<FeatureRanking>, ForecastError> {
    let target_name = alloc::format!("{target}");
    let len = ds.len();
    if range.start >= range.end || range.end > len {
        return Err(ForecastError::OutOfRange {
            start: range.start,
            end: range.end,
            len,
        });
    }
    let y = &ds.variable(target)?.values()[range.clone()];
    let mut out: Vec<FeatureRanking> = ds
        .named_series()
        .into_iter()
        .filter(|(name, _)| *name != target_name)
        .map(|(name, s)| {
            let correlation =
                stats::pearson_correlation(&s.values()[range.clone()], y).unwrap_or(0.0);
            FeatureRanking { name, correlation }
        })
        .collect();
    out.sort_by(|a, b| {
        b.correlation
            .abs()
            .total_cmp(&a.correlation.abs())
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(out)
}

/// Names of the `n` series most correlated with `target`.
pub fn select_features(
    ds: &ScenarioDataset,
    target: Variable,
    range: Range<usize>,
    n: usize,
) -> Result<Vec<String>, ForecastError> {
    let ranked = rank_features(ds, target, range)?;
    if n > ranked.len() {
        return Err(ForecastError::TooManyFeatures {
            requested: n,
            available: ranked.len(),
        });
    }
    Ok(ranked.into_iter().take(n).map(|r| r.name).collect())
}
