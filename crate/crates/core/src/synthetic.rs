//! Seeded synthetic scenarios: a desk-scale stand-in for a real building
//! estate dataset.
//!
//! Loads are `base * (1 + daily + weekly + annual sinusoids) * LogNormal(0, s)`,
//! solar is a clipped diurnal half-sine scaled by season and daily cloud
//! cover, and price / carbon follow two-peak daily profiles plus Gaussian
//! noise.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use chrono::{Datelike, Timelike};
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::rng;
use crate::series::{BuildingId, ScenarioDataset, SeriesError, TimeSeries};

/// 2018-01-01T00:00Z in hours since the epoch.
pub const DEFAULT_START_HOUR: i64 = 17_532 * 24;

pub const MIN_HOURS: usize = 168;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SyntheticError {
    #[error("need at least {MIN_HOURS} hours, got {0}")]
    TooShort(usize),
    #[error("need at least one building")]
    NoBuildings,
    #[error("invalid parameter: {0}")]
    BadParameter(&'static str),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Abrupt change in load behaviour from hour `at` onwards, applied to all
/// buildings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeShift {
    pub at: usize,
    /// Multiplier on the base load after the shift.
    pub level_factor: f64,
    /// Shift of the daily peak, in hours.
    pub phase_shift_hours: f64,
    /// Multiplier on the load noise level after the shift.
    pub noise_factor: f64,
    /// Multiplier on the weekly amplitude after the shift.
    pub weekly_factor: f64,
}

impl RegimeShift {
    /// Level and phase change only.
    pub fn level(at: usize, level_factor: f64, phase_shift_hours: f64) -> Self {
        Self {
            at,
            level_factor,
            phase_shift_hours,
            noise_factor: 1.0,
            weekly_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_buildings: usize,
    pub n_hours: usize,
    pub seed: u64,
    pub start_hour: i64,
    /// Per-building base loads are drawn uniformly from this range (kWh/h).
    pub base_load: (f64, f64),
    pub daily_amplitude: f64,
    pub weekly_amplitude: f64,
    pub annual_amplitude: f64,
    /// Log-space standard deviation of the multiplicative load noise.
    pub noise_sigma: f64,
    /// Maximum fractional attenuation of a day's solar output by cloud.
    pub cloudiness: f64,
    pub price_base: f64,
    pub price_peak: f64,
    pub price_noise: f64,
    pub carbon_base: f64,
    pub carbon_peak: f64,
    pub carbon_noise: f64,
    pub regime_shift: Option<RegimeShift>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n_buildings: 3,
            n_hours: 720,
            seed: 0,
            start_hour: DEFAULT_START_HOUR,
            base_load: (50.0, 400.0),
            daily_amplitude: 0.35,
            weekly_amplitude: 0.1,
            annual_amplitude: 0.15,
            noise_sigma: 0.05,
            cloudiness: 0.5,
            price_base: 0.15,
            price_peak: 0.15,
            price_noise: 0.01,
            carbon_base: 0.18,
            carbon_peak: 0.08,
            carbon_noise: 0.01,
            regime_shift: None,
        }
    }
}

fn hours_to_datetime(hour: i64) -> chrono::DateTime<chrono::Utc> {
    chrono::DateTime::from_timestamp(hour * 3600, 0).expect("timestamp in chrono range")
}

/// Squared circular distance between two hours of the day.
fn hour_gap2(h: f64, centre: f64) -> f64 {
    let mut d = libm::fmod(libm::fmod(h - centre, 24.0) + 24.0, 24.0);
    if d > 12.0 {
        d = 24.0 - d;
    }
    d * d
}

fn two_peak(h: f64, first: f64, second: f64) -> f64 {
    libm::exp(-hour_gap2(h, first) / (2.0 * 1.5 * 1.5))
        + libm::exp(-hour_gap2(h, second) / (2.0 * 2.0 * 2.0))
}

pub fn generate_synthetic_scenario(
    cfg: &SyntheticConfig,
) -> Result<ScenarioDataset, SyntheticError> {
    if cfg.n_hours < MIN_HOURS {
        return Err(SyntheticError::TooShort(cfg.n_hours));
    }
    if cfg.n_buildings == 0 {
        return Err(SyntheticError::NoBuildings);
    }
    let amp = cfg.daily_amplitude + cfg.weekly_amplitude + cfg.annual_amplitude;
    if !(0.0..1.0).contains(&amp)
        || cfg.daily_amplitude < 0.0
        || cfg.weekly_amplitude < 0.0
        || cfg.annual_amplitude < 0.0
    {
        return Err(SyntheticError::BadParameter(
            "load amplitudes must be >= 0 and sum below 1",
        ));
    }
    if !(cfg.base_load.0 > 0.0 && cfg.base_load.1 >= cfg.base_load.0) {
        return Err(SyntheticError::BadParameter(
            "base_load range must be positive and ordered",
        ));
    }
    if !(cfg.noise_sigma >= 0.0 && (0.0..=1.0).contains(&cfg.cloudiness)) {
        return Err(SyntheticError::BadParameter(
            "noise_sigma >= 0 and cloudiness in [0, 1]",
        ));
    }
    if cfg.price_noise < 0.0 || cfg.carbon_noise < 0.0 {
        return Err(SyntheticError::BadParameter("noise levels must be >= 0"));
    }

    let mut rng = rng::stream(cfg.seed, rng::streams::SYNTHETIC);
    let n = cfg.n_hours;
    let times: Vec<_> = (0..n)
        .map(|i| hours_to_datetime(cfg.start_hour + i as i64))
        .collect();
    let hour_of_day = |i: usize| f64::from(times[i].hour());
    let day_of_year = |i: usize| f64::from(times[i].ordinal0());

    let lognormal = LogNormal::new(0.0, cfg.noise_sigma)
        .map_err(|_| SyntheticError::BadParameter("noise_sigma"))?;
    if let Some(s) = cfg.regime_shift {
        let shifted =
            cfg.daily_amplitude + s.weekly_factor * cfg.weekly_amplitude + cfg.annual_amplitude;
        if !(s.noise_factor >= 0.0
            && s.weekly_factor >= 0.0
            && s.level_factor > 0.0
            && shifted < 1.0)
        {
            return Err(SyntheticError::BadParameter(
                "regime shift factors must be >= 0 (level > 0)",
            ));
        }
    }
    let mut buildings = BTreeMap::new();
    for b in 0..cfg.n_buildings {
        let base = rng.random_range(cfg.base_load.0..=cfg.base_load.1);
        // daily peak between 10:00 and 16:00, weekly phase random
        let peak_hour = rng.random_range(10.0..16.0);
        let weekly_phase = rng.random_range(0.0..2.0 * PI);
        let values = (0..n)
            .map(|i| {
                let (mut level, mut peak, mut weekly, mut noise) =
                    (base, peak_hour, cfg.weekly_amplitude, 1.0);
                if let Some(shift) = cfg.regime_shift {
                    if i >= shift.at {
                        level *= shift.level_factor;
                        peak += shift.phase_shift_hours;
                        weekly *= shift.weekly_factor;
                        noise = shift.noise_factor;
                    }
                }
                let h = hour_of_day(i);
                let t = (cfg.start_hour + i as i64) as f64;
                let shape = 1.0
                    + cfg.daily_amplitude * libm::cos(2.0 * PI * (h - peak) / 24.0)
                    + weekly * libm::sin(2.0 * PI * t / 168.0 + weekly_phase)
                    + cfg.annual_amplitude * libm::cos(2.0 * PI * day_of_year(i) / 365.25);
                level * shape * libm::pow(lognormal.sample(&mut rng), noise)
            })
            .collect();
        buildings.insert(
            BuildingId(b as u32),
            TimeSeries::hourly(cfg.start_hour, values)?,
        );
    }

    let mut solar = Vec::with_capacity(n);
    let mut cloud = 1.0;
    for i in 0..n {
        if i == 0 || times[i].hour() == 0 {
            cloud = 1.0 - cfg.cloudiness * rng.random::<f64>();
        }
        let h = hour_of_day(i);
        let season = 0.55 + 0.45 * libm::cos(2.0 * PI * (day_of_year(i) - 172.0) / 365.25);
        let g = if (6.0..18.0).contains(&h) {
            libm::sin(PI * (h - 6.0) / 12.0)
        } else {
            0.0
        };
        solar.push((g * season * cloud).clamp(0.0, 1.0));
    }

    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let price: Vec<f64> = (0..n)
        .map(|i| {
            cfg.price_base
                + cfg.price_peak * two_peak(hour_of_day(i), 8.0, 18.0)
                + cfg.price_noise * unit.sample(&mut rng)
        })
        .collect();
    let carbon: Vec<f64> = (0..n)
        .map(|i| {
            let annual = 1.0 + 0.2 * libm::cos(2.0 * PI * day_of_year(i) / 365.25);
            let v = cfg.carbon_base * annual
                + cfg.carbon_peak * two_peak(hour_of_day(i), 9.0, 19.0)
                + cfg.carbon_noise * unit.sample(&mut rng);
            v.max(0.0)
        })
        .collect();

    let temperature: Vec<f64> = (0..n)
        .map(|i| {
            10.0 - 7.0 * libm::cos(2.0 * PI * (day_of_year(i) - 15.0) / 365.25)
                + 4.0 * libm::sin(2.0 * PI * (hour_of_day(i) - 9.0) / 24.0)
                + unit.sample(&mut rng)
        })
        .collect();
    let humidity: Vec<f64> = (0..n)
        .map(|i| {
            (75.0 - 12.0 * libm::sin(2.0 * PI * (hour_of_day(i) - 9.0) / 24.0)
                + 3.0 * unit.sample(&mut rng))
            .clamp(0.0, 100.0)
        })
        .collect();

    let hourly = |v: Vec<f64>| TimeSeries::hourly(cfg.start_hour, v);
    let mut covariates = BTreeMap::new();
    covariates.insert(String::from("temperature"), hourly(temperature)?);
    covariates.insert(String::from("humidity"), hourly(humidity)?);
    covariates.insert(
        String::from("hour"),
        hourly((0..n).map(hour_of_day).collect())?,
    );
    covariates.insert(
        String::from("day"),
        hourly(
            (0..n)
                .map(|i| f64::from(times[i].weekday().num_days_from_monday()))
                .collect(),
        )?,
    );
    covariates.insert(
        String::from("month"),
        hourly((0..n).map(|i| f64::from(times[i].month())).collect())?,
    );

    Ok(ScenarioDataset::new(
        buildings,
        hourly(solar)?,
        hourly(price)?,
        hourly(carbon)?,
        covariates,
    )?)
}
