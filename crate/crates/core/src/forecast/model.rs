use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::nn::ModelParameters;
use super::scaler::Scaler;
use super::train::{online_update, predict, ForecasterConfig};
use super::{perfect_forecast, ForecastError, Forecaster};
use crate::mpc::ForecastSet;
use crate::series::{ScenarioDataset, Variable};

/// A fitted network with its input scaling and the names of the covariate
/// series it reads after the target.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub params: ModelParameters,
    pub scaler: Scaler,
    pub features: Vec<String>,
}

impl TrainedModel {
    pub fn window(&self) -> usize {
        self.params.window
    }

    pub fn horizon(&self) -> usize {
        self.params.horizon
    }

    /// Target followed by covariates over `range`, looked up by name in `ds`.
    pub fn channels<'a>(
        &self,
        ds: &'a ScenarioDataset,
        target: Variable,
        range: core::ops::Range<usize>,
    ) -> Result<Vec<&'a [f64]>, ForecastError> {
        let mut out = Vec::with_capacity(1 + self.features.len());
        out.push(&ds.variable(target)?.values()[range.clone()]);
        if !self.features.is_empty() {
            let named = ds.named_series();
            for f in &self.features {
                let s = named
                    .iter()
                    .find(|(n, _)| n == f)
                    .ok_or_else(|| ForecastError::UnknownSeries(f.clone()))?;
                out.push(&s.1.values()[range.clone()]);
            }
        }
        Ok(out)
    }

    /// Forecast of `target` for `t .. t + horizon` from the preceding window.
    pub fn forecast_at(
        &self,
        ds: &ScenarioDataset,
        target: Variable,
        t: usize,
    ) -> Result<Vec<f64>, ForecastError> {
        let w = self.window();
        if t < w {
            return Err(ForecastError::InsufficientHistory { t, needed: w });
        }
        predict(self, &self.channels(ds, target, t - w..t)?)
    }
}

/// Periodic warm-start fine-tuning during a forecasting run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineSchedule {
    /// Steps between updates.
    pub every: usize,
    pub epochs: usize,
    pub cfg: ForecasterConfig,
}

/// Forecasts each variable with its trained model. Variables without a
/// model are forecast perfectly.
#[derive(Debug, Clone)]
pub struct ModelForecaster {
    models: BTreeMap<Variable, TrainedModel>,
    online: Option<OnlineSchedule>,
    last_update: Option<usize>,
    updates: usize,
}

impl ModelForecaster {
    pub fn new(models: BTreeMap<Variable, TrainedModel>) -> Self {
        Self {
            models,
            online: None,
            last_update: None,
            updates: 0,
        }
    }

    pub fn with_online(mut self, schedule: OnlineSchedule) -> Self {
        self.online = Some(schedule);
        self
    }

    pub fn models(&self) -> &BTreeMap<Variable, TrainedModel> {
        &self.models
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    /// Fine-tunes every model on the data before `t` when an update is due.
    /// The first call only marks the start of the schedule.
    fn maybe_update(&mut self, ds: &ScenarioDataset, t: usize) -> Result<(), ForecastError> {
        let Some(s) = self.online else { return Ok(()) };
        let last = *self.last_update.get_or_insert(t);
        if s.every == 0 || t < last + s.every {
            return Ok(());
        }
        for (var, model) in self.models.iter_mut() {
            let span = s.every.max(model.window() + model.horizon());
            if t < span {
                continue;
            }
            let recent = model.channels(ds, *var, t - span..t)?;
            let mut cfg = s.cfg;
            cfg.seed = crate::rng::derive_seed(cfg.seed, &alloc::format!("{var}@{t}"));
            *model = online_update(model, &recent, &cfg, s.epochs)?;
        }
        self.last_update = Some(t);
        self.updates += 1;
        Ok(())
    }
}

impl Forecaster for ModelForecaster {
    fn forecast(
        &mut self,
        ds: &ScenarioDataset,
        t: usize,
        horizon: usize,
    ) -> Result<ForecastSet, ForecastError> {
        self.maybe_update(ds, t)?;
        let mut f = perfect_forecast(ds, t, horizon)?;
        for (var, model) in &self.models {
            if model.horizon() < horizon {
                return Err(ForecastError::Shape {
                    expected: horizon,
                    got: model.horizon(),
                });
            }
            let mut pred = model.forecast_at(ds, *var, t)?;
            pred.truncate(horizon);
            match var {
                Variable::Load(id) => {
                    f.load.insert(*id, pred);
                }
                Variable::Solar => f.solar = pred,
                Variable::Price => f.price = pred,
                Variable::Carbon => f.carbon = pred,
            }
        }
        Ok(f)
    }
}

impl core::fmt::Display for TrainedModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}(W={}, T={}",
            self.params.arch.name(),
            self.params.window,
            self.params.horizon
        )?;
        if !self.features.is_empty() {
            write!(f, ", features={}", self.features.join("+"))?;
        }
        f.write_str(")")
    }
}
