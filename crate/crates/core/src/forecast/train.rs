//! Sliding-window training with Adam, plateau learning-rate halving and
//! early stopping on the most recent windows.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::model::TrainedModel;
use super::nn::{Architecture, ModelParameters};
use super::scaler::Scaler;
use super::ForecastError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecasterConfig {
    /// Input window W, steps.
    pub window: usize,
    /// Forecast horizon T, steps.
    pub horizon: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// Epochs without improvement before the learning rate is halved.
    pub lr_patience: usize,
    /// Fraction of windows, taken from the end, held out for early stopping.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        Self {
            window: 168,
            horizon: 48,
            batch_size: 32,
            learning_rate: 1e-3,
            max_epochs: 100,
            patience: 5,
            lr_patience: 3,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl ForecasterConfig {
    pub fn validate(&self) -> Result<(), ForecastError> {
        if self.horizon < 1 || self.window < self.horizon {
            return Err(ForecastError::BadConfig("need window >= horizon >= 1"));
        }
        if self.batch_size < 1 {
            return Err(ForecastError::BadConfig("batch size must be >= 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ForecastError::BadConfig("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(ForecastError::BadConfig(
                "validation fraction must lie in [0, 1)",
            ));
        }
        Ok(())
    }
}

/// Standardized `(input, target)` training pairs stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Windows {
    pub input_len: usize,
    pub horizon: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Windows {
    pub fn len(&self) -> usize {
        self.targets.len() / self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_len..(i + 1) * self.input_len]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.horizon..(i + 1) * self.horizon]
    }
}

/// Every window of `series` (target first, then covariates, all the same
/// length): inputs are the `window` values of each channel, targets the next
/// `horizon` target values.
pub fn training_windows(
    series: &[&[f64]],
    scaler: &Scaler,
    window: usize,
    horizon: usize,
) -> Result<Windows, ForecastError> {
    let len = series.first().map_or(0, |s| s.len());
    if series.iter().any(|s| s.len() != len) || scaler.channels() != series.len() {
        return Err(ForecastError::Shape {
            expected: len,
            got: series.iter().map(|s| s.len()).min().unwrap_or(0),
        });
    }
    if len < window + horizon {
        return Err(ForecastError::InsufficientData {
            len,
            needed: window + horizon,
        });
    }
    if series.iter().any(|s| s.iter().any(|v| !v.is_finite())) {
        return Err(ForecastError::NonFinite);
    }
    let n = len - window - horizon + 1;
    let input_len = window * series.len();
    let mut inputs = Vec::with_capacity(n * input_len);
    let mut targets = Vec::with_capacity(n * horizon);
    for i in 0..n {
        for (c, s) in series.iter().enumerate() {
            inputs.extend(s[i..i + window].iter().map(|&v| scaler.standardize(c, v)));
        }
        targets.extend(
            series[0][i + window..i + window + horizon]
                .iter()
                .map(|&v| scaler.standardize(0, v)),
        );
    }
    Ok(Windows {
        input_len,
        horizon,
        inputs,
        targets,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub epochs: usize,
    pub best_epoch: usize,
    /// Mean training loss of the last epoch, standardized units.
    pub train_loss: f64,
    /// Best held-out loss, or the best training loss without a held-out set.
    pub best_loss: f64,
    pub final_learning_rate: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.step += 1;
        let c1 = 1.0 - libm::pow(Self::BETA1, f64::from(self.step));
        let c2 = 1.0 - libm::pow(Self::BETA2, f64::from(self.step));
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / (libm::sqrt(self.v[i] / c2) + Self::EPS);
        }
    }
}

/// Trains `params` on `windows`.
///
/// With `fixed_epochs = None` the last `validation_fraction` of windows is
/// held out, the learning rate halves after `lr_patience` epochs without
/// improvement, training stops after `patience` such epochs and the best
/// parameters are restored. With `Some(n)` exactly `n` epochs run on all
/// windows.
pub fn fit_windows(
    params: &mut ModelParameters,
    windows: &Windows,
    cfg: &ForecasterConfig,
    fixed_epochs: Option<usize>,
) -> Result<FitReport, ForecastError> {
    cfg.validate()?;
    if windows.input_len != params.input_len() || windows.horizon != params.horizon {
        return Err(ForecastError::Shape {
            expected: params.input_len(),
            got: windows.input_len,
        });
    }
    let n = windows.len();
    if n == 0 {
        return Err(ForecastError::InsufficientData { len: 0, needed: 1 });
    }
    let n_val = match fixed_epochs {
        Some(_) => 0,
        None if n >= 2 => ((n as f64 * cfg.validation_fraction) as usize)
            .clamp(usize::from(cfg.validation_fraction > 0.0), n - 1),
        None => 0,
    };
    let n_train = n - n_val;
    let val_in: Vec<&[f64]> = (n_train..n).map(|i| windows.input(i)).collect();
    let val_out: Vec<&[f64]> = (n_train..n).map(|i| windows.target(i)).collect();

    let mut order: Vec<usize> = (0..n_train).collect();
    let mut shuffle = rng::stream(cfg.seed, rng::streams::SHUFFLE);
    let mut adam = Adam::new(params.params.len());
    let mut grad = vec![0.0; params.params.len()];
    let mut lr = cfg.learning_rate;
    let max_epochs = fixed_epochs.unwrap_or(cfg.max_epochs);
    let mut best = params.params.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut since_lr = 0;
    let mut report = FitReport {
        epochs: 0,
        best_epoch: 0,
        train_loss: f64::NAN,
        best_loss: f64::NAN,
        final_learning_rate: lr,
    };

    for epoch in 1..=max_epochs {
        order.shuffle(&mut shuffle);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let inputs: Vec<&[f64]> = batch.iter().map(|&i| windows.input(i)).collect();
            let targets: Vec<&[f64]> = batch.iter().map(|&i| windows.target(i)).collect();
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = params.loss_and_grad(&inputs, &targets, &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(ForecastError::Diverged(epoch));
            }
            total += loss * batch.len() as f64;
            adam.update(&mut params.params, &grad, lr);
        }
        let train_loss = total / n_train as f64;
        report.epochs = epoch;
        report.train_loss = train_loss;
        if fixed_epochs.is_some() {
            continue;
        }
        let monitored = if n_val > 0 {
            params.loss(&val_in, &val_out)
        } else {
            train_loss
        };
        if !monitored.is_finite() {
            return Err(ForecastError::Diverged(epoch));
        }
        if monitored < best_loss {
            best_loss = monitored;
            best_epoch = epoch;
            best.copy_from_slice(&params.params);
            since_best = 0;
            since_lr = 0;
        } else {
            since_best += 1;
            since_lr += 1;
            if since_lr >= cfg.lr_patience {
                lr *= 0.5;
                since_lr = 0;
            }
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    if fixed_epochs.is_none() {
        params.params.copy_from_slice(&best);
        report.best_epoch = best_epoch;
        report.best_loss = best_loss;
    } else {
        report.best_epoch = report.epochs;
        report.best_loss = report.train_loss;
    }
    report.final_learning_rate = lr;
    Ok(report)
}

/// Fits a fresh model on `series` (target first, then covariates) over
/// every window, with the scaler fitted on the same data.
pub fn fit(
    arch: Architecture,
    series: &[&[f64]],
    cfg: &ForecasterConfig,
) -> Result<(TrainedModel, FitReport), ForecastError> {
    cfg.validate()?;
    if series.is_empty() {
        return Err(ForecastError::BadConfig("no series to fit"));
    }
    if cfg.window < arch.min_window() {
        return Err(ForecastError::BadConfig(
            "window too short for architecture",
        ));
    }
    let scaler = Scaler::fit(series);
    let windows = training_windows(series, &scaler, cfg.window, cfg.horizon)?;
    let mut init_rng = rng::stream(cfg.seed, rng::streams::INIT);
    let mut params =
        ModelParameters::init(arch, cfg.window, series.len(), cfg.horizon, &mut init_rng);
    let report = fit_windows(&mut params, &windows, cfg, None)?;
    Ok((
        TrainedModel {
            params,
            scaler,
            features: Vec::new(),
        },
        report,
    ))
}

/// Warm-start fine-tuning on recent data for a fixed number of epochs. The
/// scaler stays as fitted originally.
pub fn online_update(
    model: &TrainedModel,
    recent: &[&[f64]],
    cfg: &ForecasterConfig,
    epochs: usize,
) -> Result<TrainedModel, ForecastError> {
    let windows = training_windows(
        recent,
        &model.scaler,
        model.params.window,
        model.params.horizon,
    )?;
    let mut params = model.params.clone();
    fit_windows(&mut params, &windows, cfg, Some(epochs))?;
    Ok(TrainedModel {
        params,
        scaler: model.scaler.clone(),
        features: model.features.clone(),
    })
}

/// One forward pass on the last `window` values of each channel.
pub fn predict(model: &TrainedModel, history: &[&[f64]]) -> Result<Vec<f64>, ForecastError> {
    let p = &model.params;
    if history.len() != p.channels {
        return Err(ForecastError::Shape {
            expected: p.channels,
            got: history.len(),
        });
    }
    let mut x = Vec::with_capacity(p.input_len());
    for (c, h) in history.iter().enumerate() {
        if h.len() != p.window {
            return Err(ForecastError::Shape {
                expected: p.window,
                got: h.len(),
            });
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(ForecastError::NonFinite);
        }
        x.extend(h.iter().map(|&v| model.scaler.standardize(c, v)));
    }
    Ok(p.forward(&x)
        .into_iter()
        .map(|z| model.scaler.destandardize(0, z))
        .collect())
}
