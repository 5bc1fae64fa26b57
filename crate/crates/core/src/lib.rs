//! Algorithmic core for linear-program model predictive control of
//! battery storage in multi-building energy systems.
//!
//! Everything here is `no_std` + `alloc`: the dense simplex solver, the
//! receding-horizon controller and its ground-truth plant, the forecasting
//! models and their trainer, the forecast error metrics, daily-profile fPCA
//! with the Wasserstein similarity metric, and change-point screening of
//! training data. File formats, configuration and the experiment CLI live in
//! the `gridcast` crate.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod assets;
pub mod changepoint;
pub mod forecast;
pub mod fpca;
pub mod lp;
pub mod metrics;
pub mod mpc;
pub mod rng;
pub mod series;
pub mod sim;
pub mod stats;
pub mod synthetic;
pub mod wasserstein;

pub use assets::{derive_asset_specs, AssetSpec, PvSizing};
pub use series::{BuildingId, ScenarioDataset, SplitSpec, TimeSeries, Variable};
