use gridcast_core::forecast::PerfectForecaster;

use super::{Context, ExperimentOutput, Figure};
use crate::error::{ConfigError, Result};
use crate::plot::PlotKind;
use crate::table::Table;

/// Perfect-forecast control for each planning horizon. Every horizon runs
/// the same number of steps (set by the longest one) so the ratios compare
/// like with like. Runs are sequential so the wall-clock timings are not
/// distorted by sharing cores.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let horizons = &ctx.cfg.horizon_sweep.horizons;
    let longest = horizons.iter().copied().max().unwrap_or(0);
    let len = ctx.split.test.len();
    if longest == 0 || len <= longest {
        return Err(ConfigError::new(format!(
            "test period of {len} hours is too short for horizon {longest}"
        ))
        .into());
    }
    let steps = len - longest;
    let mut t = Table::new(
        "horizon",
        &[
            "horizon",
            "performance_ratio",
            "price_cost",
            "carbon_cost",
            "ramp_cost",
            "steps",
            "lp_iterations",
        ],
    );
    for &h in horizons {
        let start = std::time::Instant::now();
        let r = ctx
            .run_mpc(&mut PerfectForecaster, h, Some(steps), false)?
            .result;
        out.timings
            .insert(format!("horizon_{h:03}"), start.elapsed().as_secs_f64());
        t.push(vec![
            h.into(),
            r.performance_ratio.into(),
            r.components.price.into(),
            r.components.carbon.into(),
            r.components.ramp.into(),
            r.steps().into(),
            r.lp_iterations.into(),
        ]);
    }
    out.figures.push(Figure::plotted(
        t,
        PlotKind::lines("horizon", &["performance_ratio"], None),
    ));
    Ok(())
}
