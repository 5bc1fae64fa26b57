use std::collections::BTreeMap;

use gridcast_core::forecast::ForecastError;
use gridcast_core::Variable;
use rayon::prelude::*;

use super::{relative_change, Context, ExperimentOutput, Figure};
use crate::config::parse_architecture;
use crate::error::{HarnessError, Result};
use crate::plot::PlotKind;
use crate::table::{Cell, Table};

/// Outcome of training on one suffix of the training period.
enum Fit {
    Scored(f64, f64),
    Insufficient,
}

/// Trains on the most recent `d` hours of the training period for each
/// configured duration (0 means all of it) and scores on the test period.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let arch = parse_architecture(&ctx.cfg.forecast.architecture)?;
    let train = ctx.split.train.clone();
    let full = train.len();
    let mut durations: Vec<usize> = vec![full];
    for d in &ctx.cfg.volume.durations {
        let d = if *d == 0 { full } else { (*d).min(full) };
        if !durations.contains(&d) {
            durations.push(d);
        }
    }
    let vars = ctx.variables();
    let cells: Vec<(usize, Variable)> = durations
        .iter()
        .flat_map(|d| vars.iter().map(move |v| (*d, *v)))
        .collect();
    let needed = ctx.cfg.forecast.window + ctx.horizon() + 1;
    let fits: Vec<Fit> = cells
        .par_iter()
        .map(|&(d, var)| {
            if d < needed {
                return Ok(Fit::Insufficient);
            }
            match ctx.fit_model(arch, var, train.end - d..train.end, &[]) {
                Ok(m) => {
                    let r = ctx.score_model(&m, var, &ctx.split.test)?;
                    Ok(Fit::Scored(r.nmae, r.nrmse))
                }
                Err(HarnessError::Forecast(
                    ForecastError::InsufficientData { .. } | ForecastError::BadConfig(_),
                )) => Ok(Fit::Insufficient),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut reference = BTreeMap::new();
    for ((d, var), f) in cells.iter().zip(&fits) {
        if let (true, Fit::Scored(_, nrmse)) = (*d == full, f) {
            reference.insert(*var, *nrmse);
        }
    }
    let mut t = Table::new(
        "volume",
        &[
            "duration_hours",
            "variable",
            "nmae",
            "nrmse",
            "delta_nrmse",
            "status",
        ],
    );
    for ((d, var), f) in cells.iter().zip(&fits) {
        let row = match f {
            Fit::Scored(nmae, nrmse) => vec![
                (*d).into(),
                var.to_string().into(),
                (*nmae).into(),
                (*nrmse).into(),
                reference
                    .get(var)
                    .map(|r| relative_change(*nrmse, *r))
                    .into(),
                "ok".into(),
            ],
            Fit::Insufficient => vec![
                (*d).into(),
                var.to_string().into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                "insufficient".into(),
            ],
        };
        t.push(row);
    }
    out.figures.push(Figure::plotted(
        t,
        PlotKind::lines("duration_hours", &["delta_nrmse"], Some("variable")),
    ));
    Ok(())
}
