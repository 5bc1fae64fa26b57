//! Ground-truth plant: battery dynamics with clamping, building energy
//! balance, and episode-level evaluation of the operational objective.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::assets::AssetSpec;
use crate::mpc::ObjectiveWeights;
use crate::series::BuildingId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("trajectory lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no asset for building {0}")]
    UnknownBuilding(BuildingId),
    #[error("state of charge {soc} outside [0, {capacity}] for building {id}")]
    BadSoc {
        id: BuildingId,
        soc: f64,
        capacity: f64,
    },
    #[error("building sets of trajectories differ")]
    BuildingMismatch,
}

/// Battery state of every building, kWh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlantState {
    pub soc: BTreeMap<BuildingId, f64>,
}

/// Applies a requested battery intake `e_req` (kWh over one step, positive =
/// charge) and returns `(new_soc, e_actual)`.
///
/// The request is clamped to the power limit, then the stored-energy change
/// (`E * sqrt(eta)` when charging, `E / sqrt(eta)` when discharging) is
/// clamped to the capacity; `e_actual` is the grid-side energy that was
/// actually exchanged.
pub fn apply_action(soc: f64, e_req: f64, asset: &AssetSpec, step_hours: f64) -> (f64, f64) {
    let limit = asset.power_capacity_kw * step_hours;
    let e = e_req.clamp(-limit, limit);
    let root = libm::sqrt(asset.round_trip_efficiency);
    let cap = asset.energy_capacity_kwh;
    if e >= 0.0 {
        let delta = e * root;
        if soc + delta > cap {
            let delta = (cap - soc).max(0.0);
            (cap.max(soc), delta / root)
        } else {
            (soc + delta, e)
        }
    } else {
        let delta = e / root;
        if soc + delta < 0.0 {
            (0.0, -soc * root)
        } else {
            (soc + delta, e)
        }
    }
}

/// Building net demand `L - C_pv * g + E`; positive values are grid imports.
pub fn net_demand(load: f64, pv_kwp: f64, solar: f64, e_actual: f64) -> f64 {
    load - pv_kwp * solar + e_actual
}

/// Batteries of a set of buildings, advanced one step at a time.
#[derive(Debug, Clone)]
pub struct Plant {
    assets: BTreeMap<BuildingId, AssetSpec>,
    state: PlantState,
    step_hours: f64,
}

impl Plant {
    /// Plant with every battery at `initial_fraction` of its capacity.
    pub fn new(assets: &[AssetSpec], step_hours: f64, initial_fraction: f64) -> Self {
        let f = initial_fraction.clamp(0.0, 1.0);
        let map: BTreeMap<_, _> = assets.iter().map(|a| (a.building_id, *a)).collect();
        let soc = map
            .iter()
            .map(|(id, a)| (*id, a.energy_capacity_kwh * f))
            .collect();
        Self {
            assets: map,
            state: PlantState { soc },
            step_hours,
        }
    }

    pub fn with_state(
        assets: &[AssetSpec],
        step_hours: f64,
        state: PlantState,
    ) -> Result<Self, SimError> {
        let map: BTreeMap<_, _> = assets.iter().map(|a| (a.building_id, *a)).collect();
        for (id, soc) in &state.soc {
            let a = map.get(id).ok_or(SimError::UnknownBuilding(*id))?;
            if !(0.0..=a.energy_capacity_kwh).contains(soc) {
                return Err(SimError::BadSoc {
                    id: *id,
                    soc: *soc,
                    capacity: a.energy_capacity_kwh,
                });
            }
        }
        Ok(Self {
            assets: map,
            state,
            step_hours,
        })
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn step_hours(&self) -> f64 {
        self.step_hours
    }

    pub fn asset(&self, id: BuildingId) -> Result<&AssetSpec, SimError> {
        self.assets.get(&id).ok_or(SimError::UnknownBuilding(id))
    }

    pub fn assets(&self) -> impl Iterator<Item = &AssetSpec> {
        self.assets.values()
    }

    /// Applies one action to one building; returns the realized intake.
    pub fn apply(&mut self, id: BuildingId, e_req: f64) -> Result<f64, SimError> {
        let asset = *self.asset(id)?;
        let soc = self.state.soc.entry(id).or_insert(0.0);
        let (next, actual) = apply_action(*soc, e_req, &asset, self.step_hours);
        *soc = next;
        Ok(actual)
    }
}

/// Price, carbon and ramping cost of a net-demand trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostComponents {
    pub price: f64,
    pub carbon: f64,
    pub ramp: f64,
}

impl CostComponents {
    /// Imports are billed, exports are unpaid; the first ramp term is zero.
    pub fn of(
        net: &BTreeMap<BuildingId, Vec<f64>>,
        price: &[f64],
        carbon: &[f64],
    ) -> Result<Self, SimError> {
        let len = price.len();
        if carbon.len() != len {
            return Err(SimError::LengthMismatch(len, carbon.len()));
        }
        for series in net.values() {
            if series.len() != len {
                return Err(SimError::LengthMismatch(len, series.len()));
            }
        }
        let mut out = Self::default();
        let mut prev_total: Option<f64> = None;
        for t in 0..len {
            let imports: f64 = net.values().map(|s| s[t].max(0.0)).sum();
            let total: f64 = net.values().map(|s| s[t]).sum();
            out.price += price[t] * imports;
            out.carbon += carbon[t] * imports;
            if let Some(p) = prev_total {
                out.ramp += (total - p).abs();
            }
            prev_total = Some(total);
        }
        Ok(out)
    }

    /// Weighted sum of components, each divided by `max(1, baseline)`.
    pub fn ratio(&self, baseline: &Self, w: &ObjectiveWeights) -> f64 {
        w.gamma_p * self.price / baseline.price.max(1.0)
            + w.gamma_c * self.carbon / baseline.carbon.max(1.0)
            + w.gamma_r * self.ramp / baseline.ramp.max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeEvaluation {
    pub components: CostComponents,
    pub baseline: CostComponents,
    pub performance_ratio: f64,
}

/// Scores a controlled trajectory against the no-storage baseline.
pub fn evaluate_episode(
    net: &BTreeMap<BuildingId, Vec<f64>>,
    baseline: &BTreeMap<BuildingId, Vec<f64>>,
    price: &[f64],
    carbon: &[f64],
    w: &ObjectiveWeights,
) -> Result<EpisodeEvaluation, SimError> {
    if !net.keys().eq(baseline.keys()) {
        return Err(SimError::BuildingMismatch);
    }
    let components = CostComponents::of(net, price, carbon)?;
    let base = CostComponents::of(baseline, price, carbon)?;
    Ok(EpisodeEvaluation {
        components,
        baseline: base,
        performance_ratio: components.ratio(&base, w),
    })
}

/// Trajectories and scores of one receding-horizon run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// State of charge after each step.
    pub soc_traj: BTreeMap<BuildingId, Vec<f64>>,
    /// Realized battery intake per step.
    pub action_traj: BTreeMap<BuildingId, Vec<f64>>,
    pub net_demand_traj: BTreeMap<BuildingId, Vec<f64>>,
    pub baseline_net_demand: BTreeMap<BuildingId, Vec<f64>>,
    pub components: CostComponents,
    pub baseline_components: CostComponents,
    pub performance_ratio: f64,
    /// Total simplex iterations over all horizon solves.
    pub lp_iterations: usize,
}

impl SimulationResult {
    pub fn steps(&self) -> usize {
        self.net_demand_traj.values().next().map_or(0, Vec::len)
    }
}
