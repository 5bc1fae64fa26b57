//! Run configuration: a TOML file whose keys may be overridden from the
//! command line, resolved into the inputs every experiment shares.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gridcast_core::assets::PvSizing;
use gridcast_core::forecast::{Architecture, ForecasterConfig};
use gridcast_core::mpc::ObjectiveWeights;
use gridcast_core::synthetic::{generate_synthetic_scenario, RegimeShift, SyntheticConfig};
use gridcast_core::{derive_asset_specs, AssetSpec, BuildingId, ScenarioDataset, SplitSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{load_dataset, Schema};
use crate::error::{ConfigError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Baseline,
    Horizon,
    Generalisation,
    Volume,
    Changepoint,
    Features,
    Online,
    Noise,
    Simulate,
}

impl ExperimentKind {
    pub const ALL: [Self; 9] = [
        Self::Baseline,
        Self::Horizon,
        Self::Generalisation,
        Self::Volume,
        Self::Changepoint,
        Self::Features,
        Self::Online,
        Self::Noise,
        Self::Simulate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Horizon => "horizon",
            Self::Generalisation => "generalisation",
            Self::Volume => "volume",
            Self::Changepoint => "changepoint",
            Self::Features => "features",
            Self::Online => "online",
            Self::Noise => "noise",
            Self::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Experiment to run when the command line does not name one.
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    /// MPC planning horizon T, hours.
    pub horizon: usize,
    pub weights: WeightsConfig,
    pub scenario: ScenarioConfig,
    pub split: SplitConfig,
    pub assets: AssetsConfig,
    pub forecast: ForecastSection,
    pub horizon_sweep: HorizonSweepConfig,
    pub generalisation: GeneralisationConfig,
    pub volume: VolumeConfig,
    pub changepoint: ChangepointConfig,
    pub features: FeaturesConfig,
    pub online: OnlineConfig,
    pub noise: NoiseConfig,
    pub simulate: SimulateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            out: PathBuf::from("results"),
            threads: 0,
            horizon: 48,
            weights: WeightsConfig::default(),
            scenario: ScenarioConfig::default(),
            split: SplitConfig::default(),
            assets: AssetsConfig::default(),
            forecast: ForecastSection::default(),
            horizon_sweep: HorizonSweepConfig::default(),
            generalisation: GeneralisationConfig::default(),
            volume: VolumeConfig::default(),
            changepoint: ChangepointConfig::default(),
            features: FeaturesConfig::default(),
            online: OnlineConfig::default(),
            noise: NoiseConfig::default(),
            simulate: SimulateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub price: f64,
    pub carbon: f64,
    pub ramp: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        let w = ObjectiveWeights::default();
        Self {
            price: w.gamma_p,
            carbon: w.gamma_c,
            ramp: w.gamma_r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioSource {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub source: ScenarioSource,
    /// CSV path, relative to the config file.
    pub path: Option<PathBuf>,
    pub columns: Schema,
    pub synthetic: SyntheticSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            source: ScenarioSource::Synthetic,
            path: None,
            columns: Schema::default(),
            synthetic: SyntheticSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSection {
    pub n_buildings: usize,
    pub n_hours: usize,
    /// Scenario seed; defaults to a value derived from the master seed.
    pub seed: Option<u64>,
    pub base_load_min: f64,
    pub base_load_max: f64,
    pub daily_amplitude: f64,
    pub weekly_amplitude: f64,
    pub annual_amplitude: f64,
    pub noise_sigma: f64,
    pub cloudiness: f64,
    /// Hour of an abrupt load regime change, if any.
    pub shift_at: Option<usize>,
    pub shift_level_factor: f64,
    pub shift_phase_hours: f64,
    /// Noise level multiplier after the shift.
    pub shift_noise_factor: f64,
    /// Weekly amplitude multiplier after the shift.
    pub shift_weekly_factor: f64,
    /// Replace every building's load with a copy of building 0's.
    pub clone_buildings: bool,
}

impl Default for SyntheticSection {
    fn default() -> Self {
        let d = SyntheticConfig::default();
        Self {
            n_buildings: d.n_buildings,
            n_hours: 24 * 7 * 20,
            seed: None,
            base_load_min: d.base_load.0,
            base_load_max: d.base_load.1,
            daily_amplitude: d.daily_amplitude,
            weekly_amplitude: d.weekly_amplitude,
            annual_amplitude: d.annual_amplitude,
            noise_sigma: d.noise_sigma,
            cloudiness: d.cloudiness,
            shift_at: None,
            shift_level_factor: 1.5,
            shift_phase_hours: 0.0,
            shift_noise_factor: 1.0,
            shift_weekly_factor: 1.0,
            clone_buildings: false,
        }
    }
}

/// Fractions of the dataset used for training and validation; the test
/// period is the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: f64,
    pub validate: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train: 0.6,
            validate: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssetsConfig {
    /// PV capacity for buildings without an explicit value, kWp.
    pub pv_kwp: f64,
    /// Per-building PV capacity, keyed by building id.
    pub pv_kwp_by_building: BTreeMap<String, f64>,
    /// Per-building roof area, m2; takes precedence over capacities.
    pub roof_area_m2: BTreeMap<String, f64>,
    pub efficiency: f64,
    /// Replace every battery with a zero-capacity one.
    pub zero_capacity: bool,
    /// Initial state of charge as a fraction of capacity.
    pub initial_soc: f64,
}

impl Default for AssetsConfig {
    fn default() -> Self {
        Self {
            pv_kwp: 100.0,
            pv_kwp_by_building: BTreeMap::new(),
            roof_area_m2: BTreeMap::new(),
            efficiency: 0.9,
            zero_capacity: false,
            initial_soc: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastSection {
    pub window: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub lr_patience: usize,
    pub validation_fraction: f64,
    /// Forecasting models compared by the baseline experiment.
    pub models: Vec<String>,
    /// Architecture used by the single-model experiments.
    pub architecture: String,
    /// Hours between forecast issue times when scoring accuracy.
    pub stride: usize,
    pub persistence_period: usize,
}

impl Default for ForecastSection {
    fn default() -> Self {
        let d = ForecasterConfig::default();
        Self {
            window: d.window,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
            max_epochs: d.max_epochs,
            patience: d.patience,
            lr_patience: d.lr_patience,
            validation_fraction: d.validation_fraction,
            models: ["perfect", "persistence", "linear", "resmlp", "conv"]
                .map(String::from)
                .to_vec(),
            architecture: "linear".into(),
            stride: 1,
            persistence_period: 168,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorizonSweepConfig {
    pub horizons: Vec<usize>,
}

impl Default for HorizonSweepConfig {
    fn default() -> Self {
        Self {
            horizons: vec![12, 24, 48, 72],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneralisationConfig {
    /// Share of profile variance the fPCA components must explain.
    pub variance_share: f64,
    pub max_components: usize,
    /// Max-normalize each daily profile before fPCA.
    pub normalize_profiles: bool,
}

impl Default for GeneralisationConfig {
    fn default() -> Self {
        Self {
            variance_share: 0.9,
            max_components: 5,
            normalize_profiles: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolumeConfig {
    /// Training durations in hours, taken from the end of the training
    /// period. 0 means the full training period.
    pub durations: Vec<usize>,
}

impl Default for VolumeConfig {
    fn default() -> Self {
        Self {
            durations: vec![0, 1344, 672, 336, 168],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChangepointConfig {
    /// Multiplier on the BIC-style penalty.
    pub penalty_scale: f64,
}

impl Default for ChangepointConfig {
    fn default() -> Self {
        Self { penalty_scale: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    pub counts: Vec<usize>,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        Self {
            counts: vec![0, 1, 2, 3, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnlineConfig {
    /// Hours between updates; 0 never updates.
    pub frequencies: Vec<usize>,
    pub epochs: usize,
    /// Adam step size for fine-tuning.
    pub learning_rate: f64,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        Self {
            frequencies: vec![0, 720, 336, 168],
            epochs: 20,
            learning_rate: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Random-walk increment scales, as multiples of each variable's mean.
    pub sigmas: Vec<f64>,
    /// Named variable sets: all, load, solar, price, carbon.
    pub variable_sets: Vec<String>,
    /// Noise draws per (set, sigma) cell.
    pub replicates: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigmas: vec![0.0, 0.1, 0.25, 0.5, 1.0],
            variable_sets: ["all", "load", "solar", "price", "carbon"]
                .map(String::from)
                .to_vec(),
            replicates: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// perfect, persistence, grw, or a model architecture.
    pub forecaster: String,
    /// Noise scale for the grw forecaster.
    pub sigma: f64,
    /// Write the first horizon LP in text form.
    pub lp_dump: bool,
    /// Write the scenario dataset as CSV.
    pub export_dataset: bool,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            forecaster: "perfect".into(),
            sigma: 0.5,
            lp_dump: true,
            export_dataset: true,
        }
    }
}

pub const VARIABLE_SETS: [&str; 5] = ["all", "load", "solar", "price", "carbon"];

pub fn parse_architecture(name: &str) -> Result<Architecture, ConfigError> {
    Architecture::from_name(name)
        .ok_or_else(|| ConfigError::new(format!("unknown architecture `{name}`")))
}

/// Parses `key.path=value`. The value is read as a TOML value when it
/// parses as one and as a plain string otherwise.
pub fn parse_override(s: &str) -> Result<(Vec<String>, toml::Value), ConfigError> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| ConfigError::new(format!("override `{s}` is not key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(ConfigError::new(format!("bad override key `{key}`")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((path, value))
}

fn set_path(
    root: &mut toml::Table,
    path: &[String],
    value: toml::Value,
) -> Result<(), ConfigError> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = root;
    for p in parents {
        let entry = table
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::new(format!("`{p}` is not a table")))?;
    }
    table.insert(last.clone(), value);
    Ok(())
}

impl RunConfig {
    /// Parses TOML text, applies `overrides` on top, and validates.
    pub fn from_toml_with(
        text: &str,
        overrides: &[(Vec<String>, toml::Value)],
    ) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError::new(e.to_string()))?;
        for (path, value) in overrides {
            set_path(&mut table, path, value.clone())?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::new(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Self::from_toml_with(text, &[])
    }

    /// Reads a config file. A relative CSV path in it is resolved against
    /// the file's directory.
    pub fn load(
        path: &Path,
        overrides: &[(Vec<String>, toml::Value)],
    ) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_with(&text, overrides)?;
        if let (Some(p), Some(dir)) = (&cfg.scenario.path, path.parent()) {
            if p.is_relative() {
                cfg.scenario.path = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form of the resolved config.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn objective_weights(&self) -> Result<ObjectiveWeights, ConfigError> {
        let w = self.weights;
        ObjectiveWeights::new(w.price, w.carbon, w.ramp)
            .map_err(|_| ConfigError::new("weights must be non-negative and sum to 1"))
    }

    pub fn forecaster_config(&self, horizon: usize) -> ForecasterConfig {
        let f = &self.forecast;
        ForecasterConfig {
            window: f.window,
            horizon,
            batch_size: f.batch_size,
            learning_rate: f.learning_rate,
            max_epochs: f.max_epochs,
            patience: f.patience,
            lr_patience: f.lr_patience,
            validation_fraction: f.validation_fraction,
            seed: gridcast_core::rng::derive_seed(self.seed, "fit"),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.objective_weights()?;
        if self.horizon == 0 {
            return Err(ConfigError::new("horizon must be at least 1"));
        }
        let s = self.split;
        if !(s.train > 0.0 && s.validate >= 0.0 && s.train + s.validate < 1.0) {
            return Err(ConfigError::new(
                "split fractions must satisfy train > 0, validate >= 0, train + validate < 1",
            ));
        }
        self.forecaster_config(self.horizon)
            .validate()
            .map_err(|e| ConfigError::new(e.to_string()))?;
        if self.forecast.window < self.horizon {
            return Err(ConfigError::new(
                "forecast window must be at least the horizon",
            ));
        }
        if self.forecast.stride == 0 {
            return Err(ConfigError::new("forecast stride must be at least 1"));
        }
        for m in &self.forecast.models {
            if !matches!(m.as_str(), "perfect" | "persistence") {
                parse_architecture(m)?;
            }
        }
        parse_architecture(&self.forecast.architecture)?;
        match self.simulate.forecaster.as_str() {
            "perfect" | "persistence" | "grw" => {}
            other => {
                parse_architecture(other)?;
            }
        }
        for set in &self.noise.variable_sets {
            if !VARIABLE_SETS.contains(&set.as_str()) {
                return Err(ConfigError::new(format!("unknown variable set `{set}`")));
            }
        }
        if self
            .noise
            .sigmas
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(ConfigError::new("noise sigmas must be finite and >= 0"));
        }
        let lr = self.online.learning_rate;
        if !(lr.is_finite() && lr > 0.0) {
            return Err(ConfigError::new("online learning rate must be positive"));
        }
        if self.horizon_sweep.horizons.contains(&0) {
            return Err(ConfigError::new("sweep horizons must be at least 1"));
        }
        let a = &self.assets;
        if !(a.efficiency > 0.0 && a.efficiency <= 1.0) {
            return Err(ConfigError::new("efficiency must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&a.initial_soc) {
            return Err(ConfigError::new("initial_soc must lie in [0, 1]"));
        }
        for key in a.pv_kwp_by_building.keys().chain(a.roof_area_m2.keys()) {
            key.parse::<u32>()
                .map_err(|_| ConfigError::new(format!("building id `{key}` is not a number")))?;
        }
        if self.scenario.source == ScenarioSource::Csv && self.scenario.path.is_none() {
            return Err(ConfigError::new("csv scenario needs a path"));
        }
        Ok(())
    }

    pub fn synthetic_config(&self) -> SyntheticConfig {
        let s = &self.scenario.synthetic;
        SyntheticConfig {
            n_buildings: s.n_buildings,
            n_hours: s.n_hours,
            seed: s
                .seed
                .unwrap_or_else(|| gridcast_core::rng::derive_seed(self.seed, "scenario")),
            base_load: (s.base_load_min, s.base_load_max),
            daily_amplitude: s.daily_amplitude,
            weekly_amplitude: s.weekly_amplitude,
            annual_amplitude: s.annual_amplitude,
            noise_sigma: s.noise_sigma,
            cloudiness: s.cloudiness,
            regime_shift: s.shift_at.map(|at| RegimeShift {
                at,
                level_factor: s.shift_level_factor,
                phase_shift_hours: s.shift_phase_hours,
                noise_factor: s.shift_noise_factor,
                weekly_factor: s.shift_weekly_factor,
            }),
            ..SyntheticConfig::default()
        }
    }

    pub fn load_scenario(&self) -> Result<ScenarioDataset> {
        let ds = match self.scenario.source {
            ScenarioSource::Synthetic => generate_synthetic_scenario(&self.synthetic_config())?,
            ScenarioSource::Csv => {
                let path = self.scenario.path.as_ref().expect("validated");
                load_dataset(path, &self.scenario.columns)?
            }
        };
        if self.scenario.source == ScenarioSource::Synthetic
            && self.scenario.synthetic.clone_buildings
        {
            let first = ds.load(BuildingId(0))?.clone();
            let ids: Vec<BuildingId> = ds.building_ids().collect();
            let mut out = ds;
            for id in ids {
                out = out.with_load(id, first.clone())?;
            }
            return Ok(out);
        }
        Ok(ds)
    }

    pub fn split_spec(&self, len: usize) -> Result<SplitSpec, ConfigError> {
        let train = (len as f64 * self.split.train) as usize;
        let validate = (len as f64 * self.split.validate) as usize;
        let spec = SplitSpec {
            train: 0..train,
            validate: train..train + validate,
            test: train + validate..len,
        };
        if spec.train.is_empty() || spec.test.is_empty() {
            return Err(ConfigError::new(format!(
                "split of {len} hours leaves an empty train or test period"
            )));
        }
        Ok(spec)
    }

    pub fn pv_sizing(&self) -> PvSizing {
        let id = |k: &String| BuildingId(k.parse().expect("validated"));
        PvSizing {
            roof_area_m2: self
                .assets
                .roof_area_m2
                .iter()
                .map(|(k, v)| (id(k), *v))
                .collect(),
            capacity_kwp: self
                .assets
                .pv_kwp_by_building
                .iter()
                .map(|(k, v)| (id(k), *v))
                .collect(),
            default_kwp: self.assets.pv_kwp,
        }
    }

    /// Batteries sized from mean load over the training period.
    pub fn asset_specs(&self, ds: &ScenarioDataset, split: &SplitSpec) -> Result<Vec<AssetSpec>> {
        let specs = derive_asset_specs(ds, split.train.clone(), &self.pv_sizing())?;
        Ok(specs
            .into_iter()
            .map(|mut a| {
                a.round_trip_efficiency = self.assets.efficiency;
                if self.assets.zero_capacity {
                    a = a.without_battery();
                }
                a
            })
            .collect())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
