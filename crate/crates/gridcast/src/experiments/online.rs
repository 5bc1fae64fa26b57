use std::collections::BTreeMap;

use gridcast_core::forecast::{
    Forecaster, ForecasterConfig, ModelForecaster, OnlineSchedule, TrainedModel,
};
use gridcast_core::metrics::{evaluate_log, ForecastLog, MetricRow};
use gridcast_core::Variable;
use rayon::prelude::*;

use super::{Context, ExperimentOutput, Figure};
use crate::config::parse_architecture;
use crate::error::Result;
use crate::plot::PlotKind;
use crate::table::Table;

/// Forecasts the test period with models fine-tuned on the most recent data
/// every `every` hours (0 means never).
fn replay(
    ctx: &Context,
    models: &BTreeMap<Variable, TrainedModel>,
    every: usize,
) -> Result<(Vec<MetricRow>, usize)> {
    let mut f = ModelForecaster::new(models.clone());
    if every > 0 {
        f = f.with_online(OnlineSchedule {
            every,
            epochs: ctx.cfg.online.epochs,
            cfg: ForecasterConfig {
                learning_rate: ctx.cfg.online.learning_rate,
                ..ctx.forecaster_config()
            },
        });
    }
    let mut sets = Vec::new();
    for t in ctx.issue_times(&ctx.split.test) {
        sets.push((t, f.forecast(&ctx.ds, t, ctx.horizon())?));
    }
    let log = ForecastLog::from_forecasts(sets.iter().map(|(t, s)| (*t, s)));
    Ok((evaluate_log(&log, &ctx.ds)?, f.updates()))
}

pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let arch = parse_architecture(&ctx.cfg.forecast.architecture)?;
    let vars = ctx.variables();
    let models: BTreeMap<Variable, TrainedModel> = vars
        .par_iter()
        .map(|v| Ok((*v, ctx.fit_model(arch, *v, ctx.split.train.clone(), &[])?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();

    let mut freqs = ctx.cfg.online.frequencies.clone();
    if !freqs.contains(&0) {
        freqs.insert(0, 0);
    }
    let runs: Vec<(Vec<MetricRow>, usize)> = freqs
        .par_iter()
        .map(|every| replay(ctx, &models, *every))
        .collect::<Result<_>>()?;
    let never = &runs[freqs.iter().position(|f| *f == 0).expect("inserted")].0;
    let base: BTreeMap<Variable, f64> = never.iter().map(|r| (r.variable, r.nrmse)).collect();

    let mut t = Table::new(
        "online",
        &[
            "frequency_hours",
            "variable",
            "updates",
            "nrmse",
            "improvement",
        ],
    );
    for (every, (rows, updates)) in freqs.iter().zip(&runs) {
        for r in rows {
            let b = base[&r.variable];
            let improvement = if r.nrmse == b { 0.0 } else { (b - r.nrmse) / b };
            t.push(vec![
                (*every).into(),
                r.variable.to_string().into(),
                (*updates).into(),
                r.nrmse.into(),
                improvement.into(),
            ]);
        }
    }
    out.figures.push(Figure::plotted(
        t,
        PlotKind::lines("frequency_hours", &["improvement"], Some("variable")),
    ));
    Ok(())
}
