use gridcast_core::changepoint::{screen_training_data, trend_changepoints, TrainingCandidate};
use gridcast_core::{BuildingId, Variable};
use rayon::prelude::*;

use super::{relative_change, Context, ExperimentOutput, Figure};
use crate::config::parse_architecture;
use crate::dataset::format_timestamp;
use crate::error::Result;
use crate::plot::PlotKind;
use crate::table::{Cell, Table};

struct Screened {
    id: BuildingId,
    indices: Vec<usize>,
    scores: Vec<f64>,
    candidates: Vec<(TrainingCandidate, Option<(f64, f64)>)>,
}

fn screen(ctx: &Context, id: BuildingId) -> Result<Screened> {
    let arch = parse_architecture(&ctx.cfg.forecast.architecture)?;
    let var = Variable::Load(id);
    let train = ctx.split.train.clone();
    let series = &ctx.ds.variable(var)?.values()[train.clone()];
    let (_, report) = trend_changepoints(series, ctx.cfg.changepoint.penalty_scale)?;
    let needed = ctx.cfg.forecast.window + ctx.horizon() + 1;
    let candidates = screen_training_data(series.len(), &report)?
        .into_iter()
        .map(|c| {
            if c.len < needed {
                return Ok((c, None));
            }
            let m = ctx.fit_model(arch, var, train.start + c.start..train.end, &[])?;
            let v = ctx.score_model(&m, var, &ctx.split.validate)?.nrmse;
            let t = ctx.score_model(&m, var, &ctx.split.test)?.nrmse;
            Ok((c, Some((v, t))))
        })
        .collect::<Result<_>>()?;
    Ok(Screened {
        id,
        indices: report.indices,
        scores: report.scores,
        candidates,
    })
}

/// Detects trend change points in each building's training load, trains on
/// the data from each change point onward, and picks the candidate with the
/// best validation accuracy.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let ids: Vec<BuildingId> = ctx.ds.building_ids().collect();
    let screened: Vec<Screened> = ids
        .par_iter()
        .map(|id| screen(ctx, *id))
        .collect::<Result<_>>()?;

    let start_hour = ctx.ds.start_hour() + ctx.split.train.start as i64;
    let mut cps = Table::new("changepoints", &["building", "index", "timestamp", "score"]);
    let mut t = Table::new(
        "screening",
        &[
            "building",
            "start",
            "start_timestamp",
            "hours",
            "short",
            "validation_nrmse",
            "test_nrmse",
            "delta_nrmse",
            "selected",
            "status",
        ],
    );
    for s in &screened {
        for (i, score) in s.indices.iter().zip(&s.scores) {
            cps.push(vec![
                s.id.0.into(),
                (*i).into(),
                format_timestamp(start_hour + *i as i64).into(),
                (*score).into(),
            ]);
        }
        let full_test = s.candidates[0].1.map(|x| x.1);
        let selected = s
            .candidates
            .iter()
            .enumerate()
            .filter_map(|(k, (_, r))| r.map(|r| (k, r.0)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|x| x.0);
        for (k, (c, r)) in s.candidates.iter().enumerate() {
            let (v, te, delta, status): (Cell, Cell, Cell, &str) = match r {
                Some((v, te)) => (
                    (*v).into(),
                    (*te).into(),
                    full_test.map(|f| relative_change(*te, f)).into(),
                    "ok",
                ),
                None => (Cell::Empty, Cell::Empty, Cell::Empty, "insufficient"),
            };
            t.push(vec![
                s.id.0.into(),
                c.start.into(),
                format_timestamp(start_hour + c.start as i64).into(),
                c.len.into(),
                c.short.into(),
                v,
                te,
                delta,
                (selected == Some(k)).into(),
                status.into(),
            ]);
        }
    }
    out.figures.push(Figure::plain(cps));
    out.figures.push(Figure::plotted(
        t,
        PlotKind::lines("start", &["delta_nrmse"], Some("building")),
    ));
    Ok(())
}
