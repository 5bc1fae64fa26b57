//! Experiment drivers. Each turns a [`RunConfig`] into tables (with
//! optional plot specs), extra artifact files and wall-clock timings.
//!
//! Cells (model, building, sigma, ...) run on the current rayon pool and
//! are collected in input order, so outputs do not depend on the thread
//! count. Wall-clock timings are reported in the manifest only; the CSV
//! tables are a pure function of the config and input files.

mod baseline;
mod changepoint;
mod features;
mod generalisation;
mod horizon;
pub mod noise;
mod online;
mod simulate;
mod volume;

use std::collections::BTreeMap;
use std::ops::Range;

use gridcast_core::forecast::{
    fit, Architecture, ForecastError, Forecaster, ForecasterConfig, GrwForecaster, ModelForecaster,
    PerfectForecaster, PersistenceForecaster, TrainedModel,
};
use gridcast_core::metrics::{nmae, nrmse, ForecastLog, MetricRow};
use gridcast_core::mpc::{
    run_receding_horizon, ForecastSet, ObjectiveWeights, RecedingOptions, RecedingOutput,
};
use gridcast_core::sim::Plant;
use gridcast_core::{AssetSpec, ScenarioDataset, SplitSpec, Variable};

use crate::config::{ExperimentKind, RunConfig};
use crate::error::Result;
use crate::plot::PlotKind;
use crate::table::Table;

pub struct Figure {
    pub table: Table,
    pub plot: Option<PlotKind>,
}

impl Figure {
    pub fn plain(table: Table) -> Self {
        Self { table, plot: None }
    }

    pub fn plotted(table: Table, plot: PlotKind) -> Self {
        Self {
            table,
            plot: Some(plot),
        }
    }
}

pub struct ExperimentOutput {
    pub kind: ExperimentKind,
    pub figures: Vec<Figure>,
    /// Extra files, by path relative to the experiment directory.
    pub artifacts: Vec<(String, Vec<u8>)>,
    pub timings: BTreeMap<String, f64>,
}

impl ExperimentOutput {
    fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            figures: Vec::new(),
            artifacts: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.figures
            .iter()
            .map(|f| &f.table)
            .find(|t| t.name == name)
    }
}

/// Inputs shared by every experiment.
pub struct Context {
    pub cfg: RunConfig,
    pub ds: ScenarioDataset,
    pub split: SplitSpec,
    pub assets: Vec<AssetSpec>,
    pub weights: ObjectiveWeights,
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        Self::from_dataset(cfg, cfg.load_scenario()?)
    }

    /// Context over a dataset supplied by the caller instead of the one the
    /// config describes.
    pub fn from_dataset(cfg: &RunConfig, ds: ScenarioDataset) -> Result<Self> {
        cfg.validate()?;
        let split = cfg.split_spec(ds.len())?;
        let assets = cfg.asset_specs(&ds, &split)?;
        Ok(Self {
            weights: cfg.objective_weights()?,
            cfg: cfg.clone(),
            ds,
            split,
            assets,
        })
    }

    pub fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    pub fn forecaster_config(&self) -> ForecasterConfig {
        self.cfg.forecaster_config(self.horizon())
    }

    /// Loads first, then solar, price and carbon.
    pub fn variables(&self) -> Vec<Variable> {
        self.ds.variables()
    }

    pub fn load_variables(&self) -> Vec<Variable> {
        self.ds.building_ids().map(Variable::Load).collect()
    }

    /// Issue times whose horizon fits inside `range`.
    pub fn issue_times(&self, range: &Range<usize>) -> Vec<usize> {
        let t = self.horizon();
        if range.end < range.start + t + 1 {
            return Vec::new();
        }
        (range.start..range.end - t)
            .step_by(self.cfg.forecast.stride)
            .collect()
    }

    /// Fits `arch` to `var` (plus named covariates) over `range`.
    pub fn fit_model(
        &self,
        arch: Architecture,
        var: Variable,
        range: Range<usize>,
        features: &[String],
    ) -> Result<TrainedModel> {
        let named = self.ds.named_series();
        let mut channels = vec![&self.ds.variable(var)?.values()[range.clone()]];
        for f in features {
            let s = named
                .iter()
                .find(|(n, _)| n == f)
                .ok_or_else(|| ForecastError::UnknownSeries(f.clone()))?;
            channels.push(&s.1.values()[range.clone()]);
        }
        let (mut model, _) = fit(arch, &channels, &self.forecaster_config())?;
        model.features = features.to_vec();
        Ok(model)
    }

    /// nMAE and nRMSE of `model` forecasts issued over `range`.
    pub fn score_model(
        &self,
        model: &TrainedModel,
        var: Variable,
        range: &Range<usize>,
    ) -> Result<MetricRow> {
        let mut log = ForecastLog::default();
        for t in self.issue_times(range) {
            let mut f = model.forecast_at(&self.ds, var, t)?;
            f.truncate(self.horizon());
            log.push(t, var, f);
        }
        self.score_log(&log, var)
    }

    pub fn score_log(&self, log: &ForecastLog, var: Variable) -> Result<MetricRow> {
        let truth = self.ds.variable(var)?.values();
        Ok(MetricRow {
            variable: var,
            nmae: nmae(log, var, truth)?,
            nrmse: nrmse(log, var, truth)?,
        })
    }

    pub fn plant(&self) -> Plant {
        Plant::new(
            &self.assets,
            self.ds.step_hours(),
            self.cfg.assets.initial_soc,
        )
    }

    /// Receding-horizon run over the test period.
    pub fn run_mpc(
        &self,
        forecaster: &mut dyn Forecaster,
        horizon: usize,
        steps: Option<usize>,
        record_forecasts: bool,
    ) -> Result<RecedingOutput> {
        let mut plant = self.plant();
        Ok(run_receding_horizon(
            &self.ds,
            self.split.test.clone(),
            &self.assets,
            &self.weights,
            horizon,
            forecaster,
            &mut plant,
            &RecedingOptions {
                steps,
                record_forecasts,
                ..RecedingOptions::default()
            },
        )?)
    }
}

/// The forecasters an experiment can name in its config.
#[derive(Debug, Clone)]
pub enum AnyForecaster {
    Perfect(PerfectForecaster),
    Persistence(PersistenceForecaster),
    Grw(Box<GrwForecaster>),
    Model(Box<ModelForecaster>),
}

impl Forecaster for AnyForecaster {
    fn forecast(
        &mut self,
        ds: &ScenarioDataset,
        t: usize,
        horizon: usize,
    ) -> Result<ForecastSet, ForecastError> {
        match self {
            Self::Perfect(f) => f.forecast(ds, t, horizon),
            Self::Persistence(f) => f.forecast(ds, t, horizon),
            Self::Grw(f) => f.forecast(ds, t, horizon),
            Self::Model(f) => f.forecast(ds, t, horizon),
        }
    }
}

/// Builds a named forecaster. Model architectures are fitted on the
/// training period for every variable; the fitted models are returned too.
pub fn build_forecaster(
    ctx: &Context,
    name: &str,
    sigma: f64,
) -> Result<(AnyForecaster, Vec<(Variable, TrainedModel)>)> {
    Ok(match name {
        "perfect" => (AnyForecaster::Perfect(PerfectForecaster), Vec::new()),
        "persistence" => (
            AnyForecaster::Persistence(PersistenceForecaster {
                period: ctx.cfg.forecast.persistence_period,
            }),
            Vec::new(),
        ),
        "grw" => (
            AnyForecaster::Grw(Box::new(GrwForecaster::new(
                &ctx.ds,
                gridcast_core::forecast::NoiseSpec {
                    sigma,
                    seed: gridcast_core::rng::derive_seed(ctx.cfg.seed, "grw"),
                },
            )?)),
            Vec::new(),
        ),
        arch => {
            let arch = crate::config::parse_architecture(arch)?;
            let models: Vec<(Variable, TrainedModel)> = ctx
                .variables()
                .into_iter()
                .map(|v| Ok((v, ctx.fit_model(arch, v, ctx.split.train.clone(), &[])?)))
                .collect::<Result<_>>()?;
            (
                AnyForecaster::Model(Box::new(ModelForecaster::new(
                    models.iter().cloned().collect(),
                ))),
                models,
            )
        }
    })
}

pub fn model_file_name(model: &str, var: Variable) -> String {
    format!("models/{model}_{var}.gcm")
}

pub fn run(kind: ExperimentKind, cfg: &RunConfig) -> Result<ExperimentOutput> {
    run_in(kind, &Context::new(cfg)?)
}

pub fn run_in(kind: ExperimentKind, ctx: &Context) -> Result<ExperimentOutput> {
    let mut out = ExperimentOutput::new(kind);
    let start = std::time::Instant::now();
    match kind {
        ExperimentKind::Baseline => baseline::run(ctx, &mut out)?,
        ExperimentKind::Horizon => horizon::run(ctx, &mut out)?,
        ExperimentKind::Generalisation => generalisation::run(ctx, &mut out)?,
        ExperimentKind::Volume => volume::run(ctx, &mut out)?,
        ExperimentKind::Changepoint => changepoint::run(ctx, &mut out)?,
        ExperimentKind::Features => features::run(ctx, &mut out)?,
        ExperimentKind::Online => online::run(ctx, &mut out)?,
        ExperimentKind::Noise => noise::run(ctx, &mut out)?,
        ExperimentKind::Simulate => simulate::run(ctx, &mut out)?,
    }
    out.timings
        .insert("total".into(), start.elapsed().as_secs_f64());
    Ok(out)
}

/// Relative change `(x - reference) / reference`, or 0 when both are 0.
pub fn relative_change(x: f64, reference: f64) -> f64 {
    if x == reference {
        0.0
    } else {
        (x - reference) / reference
    }
}
