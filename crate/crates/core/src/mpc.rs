//! Receding-horizon battery control: builds the horizon LP from forecasts
//! and the current state of charge, and applies its first-step actions.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::assets::AssetSpec;
use crate::forecast::{ForecastError, Forecaster};
use crate::lp::{self, LpError, LpProblem, Relation, SolverOptions};
use crate::series::{BuildingId, ScenarioDataset, SeriesError};
use crate::sim::{evaluate_episode, net_demand, Plant, SimError, SimulationResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MpcError {
    #[error("weights must be finite, non-negative and sum to 1")]
    BadWeights,
    #[error("forecast horizon must be at least 1")]
    EmptyHorizon,
    #[error("forecast vector {0} has the wrong length")]
    ForecastShape(&'static str),
    #[error("forecast contains non-finite values")]
    NonFiniteForecast,
    #[error("no asset for building {0}")]
    UnknownBuilding(BuildingId),
    #[error("initial state for building {0} is missing or out of bounds")]
    BadState(BuildingId),
    #[error("horizon LP ended with status {0:?}")]
    NotOptimal(lp::LpStatus),
    #[error("test range of {len} steps is too short for horizon {horizon}")]
    TooShort { len: usize, horizon: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Weights of the price, carbon and ramping objective components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    pub gamma_p: f64,
    pub gamma_c: f64,
    pub gamma_r: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            gamma_p: 0.45,
            gamma_c: 0.45,
            gamma_r: 0.1,
        }
    }
}

impl ObjectiveWeights {
    pub fn new(gamma_p: f64, gamma_c: f64, gamma_r: f64) -> Result<Self, MpcError> {
        let w = Self {
            gamma_p,
            gamma_c,
            gamma_r,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), MpcError> {
        let all = [self.gamma_p, self.gamma_c, self.gamma_r];
        if all.iter().any(|g| !g.is_finite() || *g < 0.0)
            || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(MpcError::BadWeights);
        }
        Ok(())
    }
}

/// What the controller knows at decision time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControllerState {
    /// State of charge per building, kWh.
    pub soc: BTreeMap<BuildingId, f64>,
    /// Realized net demand of the previous step per building, kWh.
    pub prev_net_demand: BTreeMap<BuildingId, f64>,
}

/// Forecasts over one planning horizon. Slot 0 is the step being decided.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    pub horizon: usize,
    pub step_hours: f64,
    pub load: BTreeMap<BuildingId, Vec<f64>>,
    pub solar: Vec<f64>,
    pub price: Vec<f64>,
    pub carbon: Vec<f64>,
}

impl ForecastSet {
    pub fn validate(&self) -> Result<(), MpcError> {
        if self.horizon == 0 {
            return Err(MpcError::EmptyHorizon);
        }
        let t = self.horizon;
        for (name, v) in [
            ("solar", &self.solar),
            ("price", &self.price),
            ("carbon", &self.carbon),
        ] {
            if v.len() != t {
                return Err(MpcError::ForecastShape(name));
            }
        }
        if self.load.values().any(|v| v.len() != t) {
            return Err(MpcError::ForecastShape("load"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&self.solar)
            && finite(&self.price)
            && finite(&self.carbon)
            && self.load.values().all(|v| finite(v)))
            || !(self.step_hours.is_finite() && self.step_hours > 0.0)
        {
            return Err(MpcError::NonFiniteForecast);
        }
        Ok(())
    }

    /// Ground-truth slice `t .. t + horizon` of `ds`.
    pub fn from_truth(ds: &ScenarioDataset, t: usize, horizon: usize) -> Result<Self, SeriesError> {
        let end = t.saturating_add(horizon);
        if horizon == 0 {
            return Err(SeriesError::EmptyRange(t..end));
        }
        if end > ds.len() {
            return Err(SeriesError::OutOfRange {
                range: t..end,
                len: ds.len(),
            });
        }
        let take = |s: &crate::series::TimeSeries| s.values()[t..end].to_vec();
        Ok(Self {
            horizon,
            step_hours: ds.step_hours(),
            load: ds
                .buildings()
                .iter()
                .map(|(id, s)| (*id, take(s)))
                .collect(),
            solar: take(ds.solar()),
            price: take(ds.price()),
            carbon: take(ds.carbon()),
        })
    }

    /// No-storage net demand per building, with loads and solar clipped at 0.
    fn base_net(
        &self,
        assets: &BTreeMap<BuildingId, AssetSpec>,
    ) -> Result<BTreeMap<BuildingId, Vec<f64>>, MpcError> {
        self.load
            .iter()
            .map(|(id, l)| {
                let a = assets.get(id).ok_or(MpcError::UnknownBuilding(*id))?;
                let v = l
                    .iter()
                    .zip(&self.solar)
                    .map(|(&l, &g)| net_demand(l.max(0.0), a.pv_capacity_kwp, g.max(0.0), 0.0))
                    .collect();
                Ok((*id, v))
            })
            .collect()
    }
}

/// Per-horizon objective normalizers `(O_p, O_c, O_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizers {
    pub price: f64,
    pub carbon: f64,
    pub ramp: f64,
}

fn normalizers_from_net(
    net: &BTreeMap<BuildingId, Vec<f64>>,
    f: &ForecastSet,
    prev_total: f64,
) -> Normalizers {
    let mut out = Normalizers {
        price: 0.0,
        carbon: 0.0,
        ramp: 0.0,
    };
    let mut prev = prev_total;
    for tau in 0..f.horizon {
        let imports: f64 = net.values().map(|v| v[tau].max(0.0)).sum();
        let total: f64 = net.values().map(|v| v[tau]).sum();
        out.price += f.price[tau] * imports;
        out.carbon += f.carbon[tau] * imports;
        out.ramp += (total - prev).abs();
        prev = total;
    }
    Normalizers {
        price: out.price.max(1.0),
        carbon: out.carbon.max(1.0),
        ramp: out.ramp.max(1.0),
    }
}

/// Objective components of the forecast horizon without storage, each
/// clipped below at 1. Buildings missing from `prev_net_demand` contribute
/// their first forecast step, so their initial ramp term is zero.
pub fn compute_normalizers(
    f: &ForecastSet,
    assets: &[AssetSpec],
    prev_net_demand: &BTreeMap<BuildingId, f64>,
) -> Result<Normalizers, MpcError> {
    f.validate()?;
    let assets = asset_map(assets);
    let net = f.base_net(&assets)?;
    Ok(normalizers_from_net(
        &net,
        f,
        prev_total(&net, prev_net_demand),
    ))
}

fn prev_total(net: &BTreeMap<BuildingId, Vec<f64>>, prev: &BTreeMap<BuildingId, f64>) -> f64 {
    net.iter()
        .map(|(id, v)| prev.get(id).copied().unwrap_or(v[0]))
        .sum()
}

fn asset_map(assets: &[AssetSpec]) -> BTreeMap<BuildingId, AssetSpec> {
    assets.iter().map(|a| (a.building_id, *a)).collect()
}

/// Column positions in the horizon LP.
///
/// For building index `b` and slot `tau`, the columns `3 * (b * T + tau)`
/// onwards hold the battery intake `E`, the end-of-slot state of charge and
/// the import auxiliary `u`; the ramp auxiliaries `r[tau]` follow all
/// building columns.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonLayout {
    pub buildings: Vec<BuildingId>,
    pub horizon: usize,
}

impl HorizonLayout {
    pub fn energy(&self, b: usize, tau: usize) -> usize {
        3 * (b * self.horizon + tau)
    }

    pub fn soc(&self, b: usize, tau: usize) -> usize {
        self.energy(b, tau) + 1
    }

    pub fn import(&self, b: usize, tau: usize) -> usize {
        self.energy(b, tau) + 2
    }

    pub fn ramp(&self, tau: usize) -> usize {
        3 * self.buildings.len() * self.horizon + tau
    }

    pub fn num_vars(&self) -> usize {
        (3 * self.buildings.len() + 1) * self.horizon
    }
}

/// Horizon LP and the information needed to read its solution.
#[derive(Debug, Clone)]
pub struct HorizonProgram {
    pub problem: LpProblem,
    pub layout: HorizonLayout,
    pub normalizers: Normalizers,
    /// Feasible idle plan: no battery use, imports and ramps at their
    /// baseline values. Used as the solver's starting point.
    pub idle: Vec<f64>,
}

/// Builds the horizon LP. Negative price and carbon forecasts are clamped to
/// zero in the objective so the import auxiliaries stay tight.
pub fn build_horizon_lp(
    state: &ControllerState,
    f: &ForecastSet,
    assets: &[AssetSpec],
    w: &ObjectiveWeights,
) -> Result<HorizonProgram, MpcError> {
    f.validate()?;
    w.validate()?;
    let assets = asset_map(assets);
    let net = f.base_net(&assets)?;
    let normalizers = normalizers_from_net(&net, f, prev_total(&net, &state.prev_net_demand));
    let t_len = f.horizon;
    let layout = HorizonLayout {
        buildings: f.load.keys().copied().collect(),
        horizon: t_len,
    };
    let mut objective = vec![0.0; layout.num_vars()];
    let mut bounds = vec![(0.0, f64::INFINITY); layout.num_vars()];
    let mut idle = vec![0.0; layout.num_vars()];
    let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> =
        Vec::with_capacity((3 * layout.buildings.len() + 2) * t_len);

    let cp = w.gamma_p / normalizers.price;
    let cc = w.gamma_c / normalizers.carbon;
    for (b, id) in layout.buildings.iter().enumerate() {
        let a = assets[id];
        let soc0 = *state.soc.get(id).ok_or(MpcError::BadState(*id))?;
        if !(soc0.is_finite() && (0.0..=a.energy_capacity_kwh).contains(&soc0)) {
            return Err(MpcError::BadState(*id));
        }
        let root = libm::sqrt(a.round_trip_efficiency);
        let e_max = a.power_capacity_kw * f.step_hours;
        for tau in 0..t_len {
            let (e, s, u) = (
                layout.energy(b, tau),
                layout.soc(b, tau),
                layout.import(b, tau),
            );
            bounds[e] = (-e_max, e_max);
            bounds[s] = (0.0, a.energy_capacity_kwh);
            objective[u] = cp * f.price[tau].max(0.0) + cc * f.carbon[tau].max(0.0);
            idle[s] = soc0;
            idle[u] = net[id][tau].max(0.0);
            for gain in [root, 1.0 / root] {
                if tau == 0 {
                    rows.push((vec![(s, 1.0), (e, -gain)], Relation::Le, soc0));
                } else {
                    rows.push((
                        vec![(s, 1.0), (layout.soc(b, tau - 1), -1.0), (e, -gain)],
                        Relation::Le,
                        0.0,
                    ));
                }
            }
            rows.push((vec![(u, 1.0), (e, -1.0)], Relation::Ge, net[id][tau]));
        }
    }

    let mut prev_base = prev_total(&net, &state.prev_net_demand);
    for tau in 0..t_len {
        let r = layout.ramp(tau);
        objective[r] = w.gamma_r / normalizers.ramp;
        let base: f64 = net.values().map(|v| v[tau]).sum();
        let diff = base - prev_base;
        prev_base = base;
        idle[r] = diff.abs();
        // r >= ±(sum_b E[tau] - sum_b E[tau-1] + diff)
        for sign in [1.0, -1.0] {
            let mut coeffs = vec![(r, 1.0)];
            for b in 0..layout.buildings.len() {
                coeffs.push((layout.energy(b, tau), -sign));
                if tau > 0 {
                    coeffs.push((layout.energy(b, tau - 1), sign));
                }
            }
            rows.push((coeffs, Relation::Ge, sign * diff));
        }
    }

    let mut problem = LpProblem::new(objective);
    for (j, (lo, hi)) in bounds.into_iter().enumerate() {
        problem.set_bounds(j, lo, hi);
    }
    for (coeffs, rel, rhs) in rows {
        problem.add_row(coeffs, rel, rhs);
    }
    Ok(HorizonProgram {
        problem,
        layout,
        normalizers,
        idle,
    })
}

/// Result of one controller decision.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// First-slot battery intake per building.
    pub actions: BTreeMap<BuildingId, f64>,
    /// End-of-slot state of charge implied by the first-slot action: the
    /// tighter of the two dynamics bounds, capped at the capacity. The LP
    /// variable itself may sit lower when spilling energy is free.
    pub planned_soc: BTreeMap<BuildingId, f64>,
    /// Optimal value of the normalized horizon objective.
    pub objective: f64,
    pub iterations: usize,
}

/// Solves the horizon LP and returns its first-step actions.
pub fn step(
    state: &ControllerState,
    f: &ForecastSet,
    assets: &[AssetSpec],
    w: &ObjectiveWeights,
) -> Result<StepOutcome, MpcError> {
    step_with(state, f, assets, w, &SolverOptions::default())
}

pub fn step_with(
    state: &ControllerState,
    f: &ForecastSet,
    assets: &[AssetSpec],
    w: &ObjectiveWeights,
    solver: &SolverOptions,
) -> Result<StepOutcome, MpcError> {
    let program = build_horizon_lp(state, f, assets, w)?;
    let sol = lp::solve_from(&program.problem, &program.idle, solver)?;
    if !sol.is_optimal() {
        return Err(MpcError::NotOptimal(sol.status));
    }
    let bounds = program.problem.bounds();
    let mut actions = BTreeMap::new();
    let mut planned_soc = BTreeMap::new();
    let assets = asset_map(assets);
    for (b, id) in program.layout.buildings.iter().enumerate() {
        let j = program.layout.energy(b, 0);
        let e = sol.x[j].clamp(bounds[j].0, bounds[j].1);
        let a = assets[id];
        let root = libm::sqrt(a.round_trip_efficiency);
        let soc0 = state.soc[id];
        let next = (soc0 + e * root)
            .min(soc0 + e / root)
            .clamp(0.0, a.energy_capacity_kwh);
        actions.insert(*id, e);
        planned_soc.insert(*id, next);
    }
    Ok(StepOutcome {
        actions,
        planned_soc,
        objective: sol.objective_value,
        iterations: sol.iterations,
    })
}

/// Controls for a receding-horizon run.
#[derive(Debug, Clone, Default)]
pub struct RecedingOptions {
    /// Number of control steps; `None` runs `len - horizon` steps.
    pub steps: Option<usize>,
    /// Keep every issued forecast in the output.
    pub record_forecasts: bool,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone)]
pub struct RecedingOutput {
    pub result: SimulationResult,
    /// `(issue index, forecast)` pairs when recording was requested.
    pub forecasts: Vec<(usize, ForecastSet)>,
}

/// Runs the controller over `test` (absolute dataset indices), advancing
/// `plant` with the realized loads and solar of `ds`.
#[allow(clippy::too_many_arguments)]
pub fn run_receding_horizon(
    ds: &ScenarioDataset,
    test: Range<usize>,
    assets: &[AssetSpec],
    w: &ObjectiveWeights,
    horizon: usize,
    forecaster: &mut dyn Forecaster,
    plant: &mut Plant,
    opts: &RecedingOptions,
) -> Result<RecedingOutput, MpcError> {
    w.validate()?;
    if horizon == 0 {
        return Err(MpcError::EmptyHorizon);
    }
    if test.start >= test.end {
        return Err(SeriesError::EmptyRange(test).into());
    }
    if test.end > ds.len() {
        return Err(SeriesError::OutOfRange {
            range: test,
            len: ds.len(),
        }
        .into());
    }
    let len = test.end - test.start;
    if len <= horizon {
        return Err(MpcError::TooShort { len, horizon });
    }
    let steps = opts.steps.unwrap_or(len - horizon).min(len - horizon);
    let amap = asset_map(assets);
    for id in ds.building_ids() {
        if !amap.contains_key(&id) {
            return Err(MpcError::UnknownBuilding(id));
        }
    }
    let ids: Vec<BuildingId> = ds.building_ids().collect();
    let solar = ds.solar().values();
    let base_at = |id: BuildingId, t: usize| -> Result<f64, MpcError> {
        Ok(net_demand(
            ds.load(id)?.values()[t],
            amap[&id].pv_capacity_kwp,
            solar[t],
            0.0,
        ))
    };

    let mut state = ControllerState::default();
    for &id in &ids {
        state.prev_net_demand.insert(id, base_at(id, test.start)?);
    }
    let mut soc_traj: BTreeMap<BuildingId, Vec<f64>> = ids
        .iter()
        .map(|id| (*id, Vec::with_capacity(steps)))
        .collect();
    let mut action_traj = soc_traj.clone();
    let mut net_traj = soc_traj.clone();
    let mut base_traj = soc_traj.clone();
    let mut forecasts = Vec::new();
    let mut lp_iterations = 0;

    for t in test.start..test.start + steps {
        for &id in &ids {
            state
                .soc
                .insert(id, plant.state().soc.get(&id).copied().unwrap_or(0.0));
        }
        let f = forecaster.forecast(ds, t, horizon)?;
        let outcome = step_with(&state, &f, assets, w, &opts.solver)?;
        lp_iterations += outcome.iterations;
        for &id in &ids {
            let actual = plant.apply(id, outcome.actions[&id])?;
            let base = base_at(id, t)?;
            let net = base + actual;
            state.prev_net_demand.insert(id, net);
            soc_traj.get_mut(&id).unwrap().push(plant.state().soc[&id]);
            action_traj.get_mut(&id).unwrap().push(actual);
            net_traj.get_mut(&id).unwrap().push(net);
            base_traj.get_mut(&id).unwrap().push(base);
        }
        if opts.record_forecasts {
            forecasts.push((t, f));
        }
    }

    let window = test.start..test.start + steps;
    let eval = evaluate_episode(
        &net_traj,
        &base_traj,
        &ds.price().values()[window.clone()],
        &ds.carbon().values()[window],
        w,
    )?;
    Ok(RecedingOutput {
        result: SimulationResult {
            soc_traj,
            action_traj,
            net_demand_traj: net_traj,
            baseline_net_demand: base_traj,
            components: eval.components,
            baseline_components: eval.baseline,
            performance_ratio: eval.performance_ratio,
            lp_iterations,
        },
        forecasts,
    })
}
