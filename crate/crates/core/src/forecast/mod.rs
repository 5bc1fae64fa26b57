//! Forecasters for the MPC inputs: ground truth, seasonal persistence,
//! Gaussian-random-walk perturbed truth, and trained direct multi-step
//! neural models.

mod codec;
mod features;
mod model;
mod nn;
mod scaler;
mod train;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::mpc::ForecastSet;
use crate::rng;
use crate::series::{ScenarioDataset, SeriesError, Variable};

pub use codec::{decode_model, encode_model, CODEC_VERSION};
pub use features::{rank_features, select_features, FeatureRanking};
pub use model::{ModelForecaster, OnlineSchedule, TrainedModel};
pub use nn::{Architecture, ModelParameters};
pub use scaler::Scaler;
pub use train::{
    fit, fit_windows, online_update, predict, training_windows, FitReport, ForecasterConfig,
    Windows,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForecastError {
    #[error("forecast window {start}..{end} exceeds series length {len}")]
    OutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("need {needed} history steps before index {t}")]
    InsufficientHistory { t: usize, needed: usize },
    #[error("training data of {len} steps is shorter than window + horizon = {needed}")]
    InsufficientData { len: usize, needed: usize },
    #[error("training diverged (non-finite loss at epoch {0})")]
    Diverged(usize),
    #[error("invalid forecaster configuration: {0}")]
    BadConfig(&'static str),
    #[error("input has wrong shape: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("no model for {0}")]
    MissingModel(String),
    #[error("requested {requested} features but only {available} are available")]
    TooManyFeatures { requested: usize, available: usize },
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
    #[error("model codec: {0}")]
    Codec(&'static str),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Source of forecasts for the receding-horizon loop. `forecast` is called
/// once per control step with the index of the step being decided; it must
/// return values for indices `t .. t + horizon` and may only use realized
/// history before `t` (except oracle forecasters).
pub trait Forecaster {
    fn forecast(
        &mut self,
        ds: &ScenarioDataset,
        t: usize,
        horizon: usize,
    ) -> Result<ForecastSet, ForecastError>;
}

fn check_window(ds: &ScenarioDataset, t: usize, horizon: usize) -> Result<(), ForecastError> {
    let end = t.saturating_add(horizon);
    if horizon == 0 || end > ds.len() {
        return Err(ForecastError::OutOfRange {
            start: t,
            end,
            len: ds.len(),
        });
    }
    Ok(())
}

/// Ground truth over `t .. t + horizon`.
pub fn perfect_forecast(
    ds: &ScenarioDataset,
    t: usize,
    horizon: usize,
) -> Result<ForecastSet, ForecastError> {
    check_window(ds, t, horizon)?;
    Ok(ForecastSet::from_truth(ds, t, horizon)?)
}

/// Values one `period` earlier: `f[k] = v[t + k - period]`.
pub fn persistence_forecast(
    ds: &ScenarioDataset,
    t: usize,
    horizon: usize,
    period: usize,
) -> Result<ForecastSet, ForecastError> {
    check_window(ds, t, horizon)?;
    if t < period || period == 0 {
        return Err(ForecastError::InsufficientHistory { t, needed: period });
    }
    Ok(ForecastSet::from_truth(ds, t - period, horizon)?)
}

/// Truth plus a Gaussian random walk: slot `k` carries `k + 1` increments,
/// each drawn i.i.d. from `N(0, sigma^2)`.
pub fn random_walk_noise<R: Rng + ?Sized>(truth: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    if sigma == 0.0 {
        return truth.to_vec();
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut walk = 0.0;
    truth
        .iter()
        .map(|v| {
            walk += normal.sample(rng);
            v + walk
        })
        .collect()
}

/// Noise level of a random-walk forecaster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Increment standard deviation, as a multiple of each variable's scale.
    pub sigma: f64,
    pub seed: u64,
}

/// Perturbs a perfect forecast of each selected variable with a fresh random
/// walk on every call. Each variable's increments have standard deviation
/// `sigma * scale[v]`, where the scale defaults to the mean absolute value
/// of the variable over the dataset.
#[derive(Debug, Clone)]
pub struct GrwForecaster {
    spec: NoiseSpec,
    noisy: Vec<Variable>,
    scale: BTreeMap<Variable, f64>,
    rng: ChaCha8Rng,
}

impl GrwForecaster {
    /// Noise on every variable of `ds`.
    pub fn new(ds: &ScenarioDataset, spec: NoiseSpec) -> Result<Self, ForecastError> {
        Self::for_variables(ds, spec, ds.variables())
    }

    pub fn for_variables(
        ds: &ScenarioDataset,
        spec: NoiseSpec,
        noisy: Vec<Variable>,
    ) -> Result<Self, ForecastError> {
        if !(spec.sigma.is_finite() && spec.sigma >= 0.0) {
            return Err(ForecastError::BadConfig("sigma must be finite and >= 0"));
        }
        let mut scale = BTreeMap::new();
        for v in ds.variables() {
            let s = ds.variable(v)?.values();
            scale.insert(v, s.iter().map(|x| x.abs()).sum::<f64>() / s.len() as f64);
        }
        Ok(Self {
            spec,
            noisy,
            scale,
            rng: rng::stream(spec.seed, rng::streams::GRW),
        })
    }

    /// Overrides the per-variable scale (e.g. absolute units when set to 1).
    pub fn with_scale(mut self, v: Variable, scale: f64) -> Self {
        self.scale.insert(v, scale);
        self
    }
}

impl Forecaster for GrwForecaster {
    fn forecast(
        &mut self,
        ds: &ScenarioDataset,
        t: usize,
        horizon: usize,
    ) -> Result<ForecastSet, ForecastError> {
        let mut f = perfect_forecast(ds, t, horizon)?;
        for v in self.noisy.clone() {
            let sigma = self.spec.sigma * self.scale.get(&v).copied().unwrap_or(1.0);
            let slot = match v {
                Variable::Load(id) => match f.load.get_mut(&id) {
                    Some(s) => s,
                    None => continue,
                },
                Variable::Solar => &mut f.solar,
                Variable::Price => &mut f.price,
                Variable::Carbon => &mut f.carbon,
            };
            *slot = random_walk_noise(slot, sigma, &mut self.rng);
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectForecaster;

impl Forecaster for PerfectForecaster {
    fn forecast(
        &mut self,
        ds: &ScenarioDataset,
        t: usize,
        horizon: usize,
    ) -> Result<ForecastSet, ForecastError> {
        perfect_forecast(ds, t, horizon)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PersistenceForecaster {
    pub period: usize,
}

impl Default for PersistenceForecaster {
    fn default() -> Self {
        Self { period: 168 }
    }
}

impl Forecaster for PersistenceForecaster {
    fn forecast(
        &mut self,
        ds: &ScenarioDataset,
        t: usize,
        horizon: usize,
    ) -> Result<ForecastSet, ForecastError> {
        persistence_forecast(ds, t, horizon, self.period)
    }
}
