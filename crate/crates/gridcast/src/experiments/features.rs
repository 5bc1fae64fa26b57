use gridcast_core::forecast::rank_features;
use gridcast_core::Variable;
use rayon::prelude::*;

use super::{relative_change, Context, ExperimentOutput, Figure};
use crate::config::parse_architecture;
use crate::error::Result;
use crate::plot::PlotKind;
use crate::table::{Cell, Table};

/// Adds the `n` series most correlated with each target (over the training
/// period) as extra model inputs, for each configured `n`.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let arch = parse_architecture(&ctx.cfg.forecast.architecture)?;
    let train = ctx.split.train.clone();
    let vars = ctx.variables();
    let rankings = vars
        .iter()
        .map(|v| Ok((*v, rank_features(&ctx.ds, *v, train.clone())?)))
        .collect::<Result<Vec<_>>>()?;

    let mut counts = ctx.cfg.features.counts.clone();
    if !counts.contains(&0) {
        counts.insert(0, 0);
    }
    let cells: Vec<(usize, usize)> = counts
        .iter()
        .flat_map(|n| (0..vars.len()).map(move |k| (*n, k)))
        .collect();
    let scores: Vec<Option<(Vec<String>, f64)>> = cells
        .par_iter()
        .map(|&(n, k)| {
            let (var, ranked) = &rankings[k];
            if n > ranked.len() {
                return Ok(None);
            }
            let names: Vec<String> = ranked.iter().take(n).map(|r| r.name.clone()).collect();
            let m = ctx.fit_model(arch, *var, train.clone(), &names)?;
            Ok(Some((
                names,
                ctx.score_model(&m, *var, &ctx.split.test)?.nrmse,
            )))
        })
        .collect::<Result<_>>()?;

    let base = |k: usize| {
        cells
            .iter()
            .zip(&scores)
            .find(|((n, j), _)| *n == 0 && *j == k)
            .and_then(|(_, s)| s.as_ref().map(|s| s.1))
    };
    let mut t = Table::new(
        "features",
        &["n_features", "variable", "features", "nrmse", "delta_nrmse"],
    );
    for (&(n, k), s) in cells.iter().zip(&scores) {
        let var: Variable = rankings[k].0;
        let row = match s {
            Some((names, nrmse)) => vec![
                n.into(),
                var.to_string().into(),
                names.join(";").into(),
                (*nrmse).into(),
                base(k).map(|b| relative_change(*nrmse, b)).into(),
            ],
            None => vec![
                n.into(),
                var.to_string().into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ],
        };
        t.push(row);
    }
    let mut ranking = Table::new("ranking", &["variable", "rank", "feature", "correlation"]);
    for (var, ranked) in &rankings {
        for (i, r) in ranked.iter().enumerate() {
            ranking.push(vec![
                var.to_string().into(),
                (i + 1).into(),
                r.name.as_str().into(),
                r.correlation.into(),
            ]);
        }
    }
    out.figures.push(Figure::plotted(
        t,
        PlotKind::lines("n_features", &["nrmse"], Some("variable")),
    ));
    out.figures.push(Figure::plain(ranking));
    Ok(())
}
