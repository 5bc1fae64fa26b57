use gridcast_core::forecast::encode_model;
use gridcast_core::metrics::{evaluate_log, ForecastLog};
use rayon::prelude::*;

use super::{build_forecaster, model_file_name, Context, ExperimentOutput, Figure};
use crate::error::Result;
use crate::export::{push_metric_rows, METRIC_COLUMNS};
use crate::plot::PlotKind;
use crate::table::Table;

struct Cell {
    model: String,
    metrics: Vec<gridcast_core::metrics::MetricRow>,
    result: gridcast_core::sim::SimulationResult,
    files: Vec<(String, Vec<u8>)>,
    seconds: f64,
}

/// Trains every configured model on the training period, runs the
/// controller on the test period with each, and scores the forecasts the
/// controller actually used.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let cells: Vec<Cell> = ctx
        .cfg
        .forecast
        .models
        .par_iter()
        .map(|name| {
            let start = std::time::Instant::now();
            let (mut f, models) = build_forecaster(ctx, name, 0.0)?;
            let run = ctx.run_mpc(&mut f, ctx.horizon(), None, true)?;
            let log = ForecastLog::from_forecasts(run.forecasts.iter().map(|(t, f)| (*t, f)));
            Ok(Cell {
                model: name.clone(),
                metrics: evaluate_log(&log, &ctx.ds)?,
                result: run.result,
                files: models
                    .iter()
                    .map(|(v, m)| (model_file_name(name, *v), encode_model(m)))
                    .collect(),
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let mut metrics = Table::new("metrics", &METRIC_COLUMNS);
    let mut perf = Table::new(
        "performance",
        &[
            "model",
            "performance_ratio",
            "price_cost",
            "carbon_cost",
            "ramp_cost",
            "lp_iterations",
        ],
    );
    for c in cells {
        push_metric_rows(&mut metrics, &c.model, &c.metrics);
        let r = &c.result;
        perf.push(vec![
            c.model.as_str().into(),
            r.performance_ratio.into(),
            r.components.price.into(),
            r.components.carbon.into(),
            r.components.ramp.into(),
            r.lp_iterations.into(),
        ]);
        out.artifacts.extend(c.files);
        out.timings.insert(format!("model_{}", c.model), c.seconds);
    }
    out.figures.push(Figure::plotted(
        metrics,
        PlotKind::lines("model", &["nmae", "nrmse"], Some("variable")),
    ));
    out.figures.push(Figure::plotted(
        perf,
        PlotKind::lines("model", &["performance_ratio"], None),
    ));
    Ok(())
}
