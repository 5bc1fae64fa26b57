//! Normalized forecast error metrics over receding-horizon forecast logs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::mpc::ForecastSet;
use crate::series::{ScenarioDataset, Variable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no forecasts logged for {0}")]
    Empty(Variable),
    #[error("mean of the target at issue times is zero")]
    ZeroNormalizer,
    #[error("forecast issued at {t} runs past the end of the truth series")]
    MissingTruth { t: usize },
}

/// One logged forecast: `values[k]` predicts index `t + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub t: usize,
    pub variable: Variable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForecastLog {
    pub entries: Vec<LogEntry>,
}

impl ForecastLog {
    pub fn push(&mut self, t: usize, variable: Variable, values: Vec<f64>) {
        self.entries.push(LogEntry {
            t,
            variable,
            values,
        });
    }

    /// Splits forecast sets into per-variable entries.
    pub fn from_forecasts<'a>(sets: impl IntoIterator<Item = (usize, &'a ForecastSet)>) -> Self {
        let mut log = Self::default();
        for (t, f) in sets {
            for (id, v) in &f.load {
                log.push(t, Variable::Load(*id), v.clone());
            }
            log.push(t, Variable::Solar, f.solar.clone());
            log.push(t, Variable::Price, f.price.clone());
            log.push(t, Variable::Carbon, f.carbon.clone());
        }
        log
    }

    pub fn variables(&self) -> Vec<Variable> {
        let mut v: Vec<Variable> = self.entries.iter().map(|e| e.variable).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Sums of per-entry mean absolute error, per-entry RMSE and issue-time
/// truth over the entries of one variable.
fn accumulate(
    log: &ForecastLog,
    variable: Variable,
    truth: &[f64],
) -> Result<(f64, f64, f64, usize), MetricsError> {
    let (mut mae, mut rmse, mut level, mut n) = (0.0, 0.0, 0.0, 0);
    for e in log.entries.iter().filter(|e| e.variable == variable) {
        if e.values.is_empty() || e.t + e.values.len() > truth.len() {
            return Err(MetricsError::MissingTruth { t: e.t });
        }
        let actual = &truth[e.t..e.t + e.values.len()];
        let horizon = e.values.len() as f64;
        let (mut abs, mut sq) = (0.0, 0.0);
        for (f, v) in e.values.iter().zip(actual) {
            abs += (f - v).abs();
            sq += (f - v) * (f - v);
        }
        mae += abs / horizon;
        rmse += libm::sqrt(sq / horizon);
        level += truth[e.t];
        n += 1;
    }
    if n == 0 {
        return Err(MetricsError::Empty(variable));
    }
    if level == 0.0 {
        return Err(MetricsError::ZeroNormalizer);
    }
    Ok((mae, rmse, level, n))
}

/// Mean over forecasts of the per-horizon mean absolute error, divided by
/// the mean truth value at the issue times.
pub fn nmae(log: &ForecastLog, variable: Variable, truth: &[f64]) -> Result<f64, MetricsError> {
    let (mae, _, level, _) = accumulate(log, variable, truth)?;
    Ok(mae / level)
}

/// Mean over forecasts of the per-horizon RMSE, divided by the mean truth
/// value at the issue times.
pub fn nrmse(log: &ForecastLog, variable: Variable, truth: &[f64]) -> Result<f64, MetricsError> {
    let (_, rmse, level, _) = accumulate(log, variable, truth)?;
    Ok(rmse / level)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRow {
    pub variable: Variable,
    pub nmae: f64,
    pub nrmse: f64,
}

/// Both metrics for every logged variable, in variable order.
pub fn evaluate_log(
    log: &ForecastLog,
    ds: &ScenarioDataset,
) -> Result<Vec<MetricRow>, MetricsError> {
    let mut out = Vec::new();
    for variable in log.variables() {
        let truth = ds
            .variable(variable)
            .map_err(|_| MetricsError::Empty(variable))?
            .values();
        out.push(MetricRow {
            variable,
            nmae: nmae(log, variable, truth)?,
            nrmse: nrmse(log, variable, truth)?,
        });
    }
    Ok(out)
}

/// Unweighted mean of the load rows, or `None` without load rows.
pub fn building_average(rows: &[MetricRow]) -> Option<(f64, f64)> {
    let loads: Vec<&MetricRow> = rows
        .iter()
        .filter(|r| matches!(r.variable, Variable::Load(_)))
        .collect();
    if loads.is_empty() {
        return None;
    }
    let n = loads.len() as f64;
    Some((
        loads.iter().map(|r| r.nmae).sum::<f64>() / n,
        loads.iter().map(|r| r.nrmse).sum::<f64>() / n,
    ))
}

/// Metric rows keyed by variable.
pub fn by_variable(rows: &[MetricRow]) -> BTreeMap<Variable, MetricRow> {
    rows.iter().map(|r| (r.variable, *r)).collect()
}
