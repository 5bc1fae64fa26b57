//! Battery and PV asset specification and the sizing rule used to derive
//! them from building loads.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use crate::series::{BuildingId, ScenarioDataset};

/// Battery power = this many times the mean load.
pub const POWER_TO_MEAN_LOAD: f64 = 3.0;
/// Battery energy = this many hours of the mean load.
pub const ENERGY_HOURS_OF_MEAN_LOAD: f64 = 24.0;
pub const DEFAULT_EFFICIENCY: f64 = 0.9;
/// Fraction of the roof covered by panels.
pub const ROOF_COVERAGE: f64 = 0.9;
/// Panel power density, kWp/m².
pub const PANEL_DENSITY_KWP_PER_M2: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssetError {
    #[error("empty sizing range {0:?}")]
    EmptyRange(Range<usize>),
    #[error("sizing range {range:?} exceeds dataset length {len}")]
    OutOfRange { range: Range<usize>, len: usize },
    #[error("asset for building {0} has invalid parameters: {1}")]
    Invalid(BuildingId, &'static str),
}

/// Distributed assets of one building.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssetSpec {
    pub building_id: BuildingId,
    /// Battery power capacity, kW.
    pub power_capacity_kw: f64,
    /// Battery energy capacity, kWh.
    pub energy_capacity_kwh: f64,
    /// Round-trip efficiency in (0, 1].
    pub round_trip_efficiency: f64,
    /// Solar PV peak capacity, kWp.
    pub pv_capacity_kwp: f64,
}

impl AssetSpec {
    pub fn validate(&self) -> Result<(), AssetError> {
        let id = self.building_id;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(self.power_capacity_kw)
            || !nonneg(self.energy_capacity_kwh)
            || !nonneg(self.pv_capacity_kwp)
        {
            return Err(AssetError::Invalid(
                id,
                "capacities must be finite and >= 0",
            ));
        }
        if !(self.round_trip_efficiency > 0.0 && self.round_trip_efficiency <= 1.0) {
            return Err(AssetError::Invalid(id, "efficiency must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Same building with no battery.
    pub fn without_battery(self) -> Self {
        Self {
            power_capacity_kw: 0.0,
            energy_capacity_kwh: 0.0,
            ..self
        }
    }
}

/// PV capacity from roof area via the panel coverage rule.
pub fn pv_capacity_from_roof_area(area_m2: f64) -> f64 {
    ROOF_COVERAGE * area_m2 * PANEL_DENSITY_KWP_PER_M2
}

/// How PV capacity is chosen per building. A roof area takes precedence over
/// an explicit capacity; buildings with neither get `default_kwp`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PvSizing {
    pub roof_area_m2: BTreeMap<BuildingId, f64>,
    pub capacity_kwp: BTreeMap<BuildingId, f64>,
    pub default_kwp: f64,
}

impl PvSizing {
    pub fn capacity(&self, id: BuildingId) -> f64 {
        if let Some(area) = self.roof_area_m2.get(&id) {
            pv_capacity_from_roof_area(*area)
        } else {
            self.capacity_kwp
                .get(&id)
                .copied()
                .unwrap_or(self.default_kwp)
        }
    }
}

/// Sizes each building's battery from its mean load over `range`.
pub fn derive_asset_specs(
    ds: &ScenarioDataset,
    range: Range<usize>,
    pv: &PvSizing,
) -> Result<Vec<AssetSpec>, AssetError> {
    if range.start >= range.end {
        return Err(AssetError::EmptyRange(range));
    }
    if range.end > ds.len() {
        return Err(AssetError::OutOfRange {
            range,
            len: ds.len(),
        });
    }
    Ok(ds
        .buildings()
        .iter()
        .map(|(id, load)| {
            size_from_mean_load(
                *id,
                crate::stats::mean(&load.values()[range.clone()]),
                pv.capacity(*id),
            )
        })
        .collect())
}

pub fn size_from_mean_load(id: BuildingId, mean_load: f64, pv_kwp: f64) -> AssetSpec {
    AssetSpec {
        building_id: id,
        power_capacity_kw: POWER_TO_MEAN_LOAD * mean_load,
        energy_capacity_kwh: ENERGY_HOURS_OF_MEAN_LOAD * mean_load,
        round_trip_efficiency: DEFAULT_EFFICIENCY,
        pv_capacity_kwp: pv_kwp,
    }
}
