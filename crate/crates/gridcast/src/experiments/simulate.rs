use gridcast_core::forecast::{encode_model, Forecaster};
use gridcast_core::metrics::{evaluate_log, ForecastLog};
use gridcast_core::mpc::{build_horizon_lp, ControllerState};
use gridcast_core::sim::net_demand;

use super::{build_forecaster, model_file_name, Context, ExperimentOutput, Figure};
use crate::dataset::{write_dataset, Schema};
use crate::error::Result;
use crate::export::{lp_dump, push_metric_rows, simulation_table, summary_table, METRIC_COLUMNS};
use crate::plot::PlotKind;
use crate::table::Table;

/// Horizon LP of the first control step, as the controller would build it.
fn first_program(ctx: &Context, f: &mut dyn Forecaster) -> Result<String> {
    let t = ctx.split.test.start;
    let plant = ctx.plant();
    let mut state = ControllerState::default();
    for a in &ctx.assets {
        let id = a.building_id;
        state
            .soc
            .insert(id, plant.state().soc.get(&id).copied().unwrap_or(0.0));
        let load = ctx.ds.load(id)?.values()[t];
        let solar = ctx.ds.solar().values()[t];
        state
            .prev_net_demand
            .insert(id, net_demand(load, a.pv_capacity_kwp, solar, 0.0));
    }
    let forecast = f.forecast(&ctx.ds, t, ctx.horizon())?;
    let program = build_horizon_lp(&state, &forecast, &ctx.assets, &ctx.weights)?;
    Ok(lp_dump(&program.problem))
}

/// One receding-horizon run over the test period with the configured
/// forecaster, exporting trajectories, costs and forecast accuracy.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let s = &ctx.cfg.simulate;
    let (mut f, models) = build_forecaster(ctx, &s.forecaster, s.sigma)?;
    if s.lp_dump {
        let text = first_program(ctx, &mut f.clone())?;
        out.artifacts
            .push(("first_horizon.lp".into(), text.into_bytes()));
    }
    let run = ctx.run_mpc(&mut f, ctx.horizon(), None, true)?;
    let log = ForecastLog::from_forecasts(run.forecasts.iter().map(|(t, f)| (*t, f)));
    let mut metrics = Table::new("metrics", &METRIC_COLUMNS);
    push_metric_rows(&mut metrics, &s.forecaster, &evaluate_log(&log, &ctx.ds)?);

    let sim = simulation_table("simulation", &run.result, ctx.split.test.start);
    let net_cols: Vec<String> = sim
        .columns
        .iter()
        .filter(|c| c.starts_with("net_demand_"))
        .cloned()
        .collect();
    let net_cols: Vec<&str> = net_cols.iter().map(String::as_str).collect();
    out.figures
        .push(Figure::plotted(sim, PlotKind::lines("t", &net_cols, None)));
    out.figures
        .push(Figure::plain(summary_table("summary", &run.result)));
    out.figures.push(Figure::plain(metrics));
    for (v, m) in &models {
        out.artifacts
            .push((model_file_name(&s.forecaster, *v), encode_model(m)));
    }
    if s.export_dataset {
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ctx.ds, &Schema::for_dataset(&ctx.ds))?;
        out.artifacts.push(("dataset.csv".into(), buf));
    }
    Ok(())
}
