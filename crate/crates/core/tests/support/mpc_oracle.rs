//! Single-building horizon problems scored by direct simulation of an
//! action grid.

use std::collections::BTreeMap;

use gridcast_core::assets::AssetSpec;
use gridcast_core::mpc::{ControllerState, ForecastSet, ObjectiveWeights};
use gridcast_core::BuildingId;
use rand::Rng;

pub const B0: BuildingId = BuildingId(0);
pub const GRID_POINTS: usize = 41;

#[derive(Debug, Clone)]
pub struct Instance {
    pub asset: AssetSpec,
    pub soc0: f64,
    pub prev: f64,
    pub load: Vec<f64>,
    pub solar: Vec<f64>,
    pub price: Vec<f64>,
    pub carbon: Vec<f64>,
    pub weights: ObjectiveWeights,
}

impl Instance {
    pub fn random(rng: &mut impl Rng, horizon: usize) -> Self {
        let cap = rng.random_range(5.0..60.0);
        let asset = AssetSpec {
            building_id: B0,
            power_capacity_kw: rng.random_range(1.0..20.0),
            energy_capacity_kwh: cap,
            round_trip_efficiency: rng.random_range(0.7..=1.0),
            pv_capacity_kwp: rng.random_range(0.0..10.0),
        };
        let mut v = |lo: f64, hi: f64| -> Vec<f64> {
            (0..horizon).map(|_| rng.random_range(lo..hi)).collect()
        };
        let (load, solar, price, carbon) = (v(0.0, 30.0), v(0.0, 1.0), v(0.0, 2.0), v(0.0, 1.0));
        let g: [f64; 3] = [
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
        ];
        let sum: f64 = g.iter().sum();
        let weights =
            ObjectiveWeights::new(g[0] / sum, g[1] / sum, 1.0 - g[0] / sum - g[1] / sum).unwrap();
        Self {
            soc0: rng.random_range(0.0..=cap),
            prev: rng.random_range(-10.0..30.0),
            asset,
            load,
            solar,
            price,
            carbon,
            weights,
        }
    }

    pub fn horizon(&self) -> usize {
        self.load.len()
    }

    pub fn forecast(&self) -> ForecastSet {
        ForecastSet {
            horizon: self.horizon(),
            step_hours: 1.0,
            load: BTreeMap::from([(B0, self.load.clone())]),
            solar: self.solar.clone(),
            price: self.price.clone(),
            carbon: self.carbon.clone(),
        }
    }

    pub fn state(&self) -> ControllerState {
        ControllerState {
            soc: BTreeMap::from([(B0, self.soc0)]),
            prev_net_demand: BTreeMap::from([(B0, self.prev)]),
        }
    }

    fn base_net(&self, tau: usize) -> f64 {
        self.load[tau] - self.asset.pv_capacity_kwp * self.solar[tau]
    }

    /// No-storage cost sums, each floored at 1.
    pub fn normalizers(&self) -> (f64, f64, f64) {
        let (mut p, mut c, mut r) = (0.0, 0.0, 0.0);
        let mut last = self.prev;
        for tau in 0..self.horizon() {
            let net = self.base_net(tau);
            p += self.price[tau] * net.max(0.0);
            c += self.carbon[tau] * net.max(0.0);
            r += (net - last).abs();
            last = net;
        }
        (p.max(1.0), c.max(1.0), r.max(1.0))
    }

    /// Normalized horizon cost of an action sequence under exact battery
    /// dynamics, or `None` if the sequence leaves the SoC bounds.
    pub fn plan_cost(&self, actions: &[f64]) -> Option<f64> {
        let (np, nc, nr) = self.normalizers();
        let w = &self.weights;
        let root = self.asset.round_trip_efficiency.sqrt();
        let mut soc = self.soc0;
        let mut last = self.prev;
        let mut cost = 0.0;
        for (tau, &e) in actions.iter().enumerate() {
            soc += if e >= 0.0 { e * root } else { e / root };
            if soc < -1e-12 || soc > self.asset.energy_capacity_kwh + 1e-12 {
                return None;
            }
            let net = self.base_net(tau) + e;
            cost += w.gamma_p * self.price[tau] * net.max(0.0) / np
                + w.gamma_c * self.carbon[tau] * net.max(0.0) / nc
                + w.gamma_r * (net - last).abs() / nr;
            last = net;
        }
        Some(cost)
    }

    /// Best cost over every sequence drawn from a uniform grid of
    /// [`GRID_POINTS`] actions spanning the power range.
    pub fn grid_best(&self) -> f64 {
        let t = self.horizon();
        let e_max = self.asset.power_capacity_kw;
        let grid: Vec<f64> = (0..GRID_POINTS)
            .map(|i| -e_max + 2.0 * e_max * i as f64 / (GRID_POINTS - 1) as f64)
            .collect();
        let mut best = f64::INFINITY;
        let mut idx = vec![0usize; t];
        loop {
            let plan: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
            if let Some(c) = self.plan_cost(&plan) {
                best = best.min(c);
            }
            let mut k = 0;
            while k < t {
                idx[k] += 1;
                if idx[k] < GRID_POINTS {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == t {
                return best;
            }
        }
    }
}
