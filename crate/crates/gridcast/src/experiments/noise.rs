use gridcast_core::forecast::{GrwForecaster, NoiseSpec};
use gridcast_core::rng::derive_seed;
use gridcast_core::sim::SimulationResult;
use gridcast_core::Variable;
use rayon::prelude::*;

use super::{Context, ExperimentOutput, Figure};
use crate::error::{ConfigError, Result};
use crate::plot::PlotKind;
use crate::table::Table;

/// Variables named by a noise variable set.
pub fn variable_set(ctx: &Context, name: &str) -> Result<Vec<Variable>> {
    Ok(match name {
        "all" => ctx.variables(),
        "load" => ctx.load_variables(),
        "solar" => vec![Variable::Solar],
        "price" => vec![Variable::Price],
        "carbon" => vec![Variable::Carbon],
        other => return Err(ConfigError::new(format!("unknown variable set `{other}`")).into()),
    })
}

/// Seed of replicate `rep`. Every variable set and sigma of a replicate
/// draws the same underlying noise.
pub fn replicate_seed(master: u64, rep: usize) -> u64 {
    derive_seed(master, &format!("grw/{rep}"))
}

/// Control performance with random-walk forecast errors on each variable
/// set at each noise level.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let n = &ctx.cfg.noise;
    let reps = n.replicates.max(1);
    let mut cells = Vec::new();
    for set in &n.variable_sets {
        for &sigma in &n.sigmas {
            for rep in 0..reps {
                cells.push((set.as_str(), sigma, rep));
            }
        }
    }
    let results: Vec<SimulationResult> = cells
        .par_iter()
        .map(|&(set, sigma, rep)| {
            let spec = NoiseSpec {
                sigma,
                seed: replicate_seed(ctx.cfg.seed, rep),
            };
            let mut f = GrwForecaster::for_variables(&ctx.ds, spec, variable_set(ctx, set)?)?;
            Ok(ctx.run_mpc(&mut f, ctx.horizon(), None, false)?.result)
        })
        .collect::<Result<_>>()?;

    let mut t = Table::new(
        "noise",
        &[
            "variables",
            "sigma",
            "replicate",
            "performance_ratio",
            "price_cost",
            "carbon_cost",
            "ramp_cost",
        ],
    );
    for (&(set, sigma, rep), r) in cells.iter().zip(&results) {
        t.push(vec![
            set.into(),
            sigma.into(),
            rep.into(),
            r.performance_ratio.into(),
            r.components.price.into(),
            r.components.carbon.into(),
            r.components.ramp.into(),
        ]);
    }
    let mut summary = Table::new(
        "noise_summary",
        &["variables", "sigma", "mean_ratio", "min_ratio", "max_ratio"],
    );
    for chunk in cells.chunks(reps).zip(results.chunks(reps)) {
        let (set, sigma, _) = chunk.0[0];
        let ratios: Vec<f64> = chunk.1.iter().map(|r| r.performance_ratio).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        summary.push(vec![
            set.into(),
            sigma.into(),
            mean.into(),
            min.into(),
            max.into(),
        ]);
    }
    out.figures.push(Figure::plain(t));
    out.figures.push(Figure::plotted(
        summary,
        PlotKind::lines("sigma", &["mean_ratio"], Some("variables")),
    ));
    Ok(())
}
