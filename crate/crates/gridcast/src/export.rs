//! Tables and files for core results: simulation trajectories, metric rows,
//! similarity matrices, change points, saved models and LP dumps.

use std::path::Path;

use gridcast_core::changepoint::ChangePointReport;
use gridcast_core::forecast::{decode_model, encode_model, TrainedModel};
use gridcast_core::lp::{write_lp_format, LpProblem};
use gridcast_core::metrics::MetricRow;
use gridcast_core::sim::SimulationResult;
use gridcast_core::{BuildingId, Variable};

use crate::dataset::format_timestamp;
use crate::error::{HarnessError, Result};
use crate::table::{Cell, Table};

/// One row per control step: `t` (dataset index), then state of charge,
/// realized action and net demand for each building.
pub fn simulation_table(name: &str, r: &SimulationResult, first_index: usize) -> Table {
    let ids: Vec<BuildingId> = r.net_demand_traj.keys().copied().collect();
    let mut cols = vec!["t".to_string()];
    for id in &ids {
        cols.push(format!("soc_{id}"));
        cols.push(format!("action_{id}"));
        cols.push(format!("net_demand_{id}"));
    }
    let mut t = Table {
        name: name.into(),
        columns: cols,
        rows: Vec::new(),
    };
    for k in 0..r.steps() {
        let mut row: Vec<Cell> = vec![(first_index + k).into()];
        for id in &ids {
            row.push(r.soc_traj[id][k].into());
            row.push(r.action_traj[id][k].into());
            row.push(r.net_demand_traj[id][k].into());
        }
        t.push(row);
    }
    t
}

/// Cost components of the run and of the no-storage baseline, plus the
/// performance ratio.
pub fn summary_table(name: &str, r: &SimulationResult) -> Table {
    let mut t = Table::new(name, &["quantity", "controlled", "baseline"]);
    let (c, b) = (r.components, r.baseline_components);
    t.push(vec!["price_cost".into(), c.price.into(), b.price.into()]);
    t.push(vec!["carbon_cost".into(), c.carbon.into(), b.carbon.into()]);
    t.push(vec!["ramp_cost".into(), c.ramp.into(), b.ramp.into()]);
    t.push(vec![
        "performance_ratio".into(),
        r.performance_ratio.into(),
        1.0.into(),
    ]);
    t.push(vec!["steps".into(), r.steps().into(), r.steps().into()]);
    t.push(vec![
        "lp_iterations".into(),
        r.lp_iterations.into(),
        Cell::Empty,
    ]);
    t
}

pub const METRIC_COLUMNS: [&str; 5] = ["model", "variable", "building", "nmae", "nrmse"];

fn building_of(v: Variable) -> Cell {
    match v {
        Variable::Load(id) => id.0.into(),
        _ => Cell::Empty,
    }
}

/// Appends metric rows for `model`, plus a `load_mean` row holding the
/// unweighted building average when there are load rows.
pub fn push_metric_rows(t: &mut Table, model: &str, rows: &[MetricRow]) {
    for r in rows {
        t.push(vec![
            model.into(),
            r.variable.to_string().into(),
            building_of(r.variable),
            r.nmae.into(),
            r.nrmse.into(),
        ]);
    }
    if let Some((a, b)) = gridcast_core::metrics::building_average(rows) {
        t.push(vec![
            model.into(),
            "load_mean".into(),
            Cell::Empty,
            a.into(),
            b.into(),
        ]);
    }
}

/// Square building-by-building matrix in CSV form: a `building` label
/// column followed by one column per building.
pub fn matrix_table(name: &str, ids: &[BuildingId], m: &[Vec<f64>]) -> Table {
    let mut cols = vec!["building".to_string()];
    cols.extend(ids.iter().map(|id| id.to_string()));
    let mut t = Table {
        name: name.into(),
        columns: cols,
        rows: Vec::new(),
    };
    for (id, row) in ids.iter().zip(m) {
        let mut r: Vec<Cell> = vec![id.0.into()];
        r.extend(row.iter().map(|v| Cell::from(*v)));
        t.push(r);
    }
    t
}

/// Change points as `(index, timestamp, score)` rows. `start_hour` is the
/// absolute hour of index 0.
pub fn changepoint_table(name: &str, report: &ChangePointReport, start_hour: i64) -> Table {
    let mut t = Table::new(name, &["index", "timestamp", "score"]);
    for (i, s) in report.indices.iter().zip(&report.scores) {
        t.push(vec![
            (*i).into(),
            format_timestamp(start_hour + *i as i64).into(),
            (*s).into(),
        ]);
    }
    t
}

pub fn save_model(path: &Path, model: &TrainedModel) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| HarnessError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(decode_model(&bytes)?)
}

pub fn lp_dump(problem: &LpProblem) -> String {
    write_lp_format(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn simulation_columns() {
        let id = BuildingId(3);
        let r = SimulationResult {
            soc_traj: BTreeMap::from([(id, vec![1.0, 2.0])]),
            action_traj: BTreeMap::from([(id, vec![1.0, 1.0])]),
            net_demand_traj: BTreeMap::from([(id, vec![5.0, 6.0])]),
            baseline_net_demand: BTreeMap::from([(id, vec![4.0, 5.0])]),
            components: Default::default(),
            baseline_components: Default::default(),
            performance_ratio: 1.0,
            lp_iterations: 7,
        };
        let t = simulation_table("sim", &r, 100);
        assert_eq!(t.columns, ["t", "soc_3", "action_3", "net_demand_3"]);
        assert_eq!(t.rows[1][0], Cell::Int(101));
        assert_eq!(summary_table("s", &r).rows.len(), 6);
    }

    #[test]
    fn changepoint_rows_carry_timestamps() {
        let rep = ChangePointReport {
            indices: vec![24],
            scores: vec![3.5],
            cost: 0.0,
        };
        let t = changepoint_table("cp", &rep, 0);
        assert_eq!(t.rows[0][1], Cell::Text("1970-01-02T00:00:00Z".into()));
    }
}
