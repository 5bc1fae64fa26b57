use std::collections::BTreeMap;

use gridcast_core::forecast::{Scaler, TrainedModel};
use gridcast_core::fpca::{choose_k, extract_daily_profiles, fit_fpca, Profile};
use gridcast_core::wasserstein::{select_reuse_model, similarity_matrix};
use gridcast_core::{BuildingId, Variable};
use rayon::prelude::*;

use super::{Context, ExperimentOutput, Figure};
use crate::config::parse_architecture;
use crate::error::{HarnessError, Result};
use crate::export::matrix_table;
use crate::plot::PlotKind;
use crate::table::Table;

/// The model of one building with its input scaling replaced by another
/// building's training statistics, so it sees that building's load in the
/// units it was trained on.
fn rescaled(model: &TrainedModel, scaler: &Scaler) -> TrainedModel {
    TrainedModel {
        scaler: scaler.clone(),
        ..model.clone()
    }
}

/// Load models trained on each building and scored on every building,
/// relative to the target's own model; then fPCA similarity between
/// buildings and the model each target would reuse.
pub fn run(ctx: &Context, out: &mut ExperimentOutput) -> Result<()> {
    let arch = parse_architecture(&ctx.cfg.forecast.architecture)?;
    let ids: Vec<BuildingId> = ctx.ds.building_ids().collect();
    let train = ctx.split.train.clone();
    let test = ctx.split.test.clone();

    let models: Vec<TrainedModel> = ids
        .par_iter()
        .map(|id| ctx.fit_model(arch, Variable::Load(*id), train.clone(), &[]))
        .collect::<Result<_>>()?;
    let scalers: Vec<Scaler> = ids
        .iter()
        .map(|id| {
            let v = &ctx.ds.variable(Variable::Load(*id))?.values()[train.clone()];
            Ok(Scaler::fit(&[v]))
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..ids.len())
        .flat_map(|i| (0..ids.len()).map(move |j| (i, j)))
        .collect();
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let m = rescaled(&models[i], &scalers[j]);
            Ok(ctx.score_model(&m, Variable::Load(ids[j]), &test)?.nrmse)
        })
        .collect::<Result<_>>()?;
    let n = ids.len();
    let own = |j: usize| scores[j * n + j];
    let relative = |i: usize, j: usize| {
        if i == j {
            1.0
        } else {
            scores[i * n + j] / own(j)
        }
    };

    let mut transfer = Table::new(
        "transfer",
        &[
            "train_building",
            "target_building",
            "nrmse",
            "relative_nrmse",
        ],
    );
    for &(i, j) in &pairs {
        transfer.push(vec![
            ids[i].0.into(),
            ids[j].0.into(),
            scores[i * n + j].into(),
            relative(i, j).into(),
        ]);
    }

    let g = &ctx.cfg.generalisation;
    let mut profiles: BTreeMap<BuildingId, Vec<Profile>> = BTreeMap::new();
    for id in &ids {
        let s = ctx.ds.load(*id)?.slice(train.clone())?;
        profiles.insert(*id, extract_daily_profiles(&s, g.normalize_profiles)?);
    }
    let pooled: Vec<Profile> = profiles.values().flatten().copied().collect();
    let k = choose_k(&pooled, g.variance_share, g.max_components)?;
    let fpca = fit_fpca(&pooled, k)?;
    let weights = fpca.variance_weights();
    let sets: BTreeMap<_, _> = profiles
        .iter()
        .map(|(id, p)| (*id, fpca.transform(p)))
        .collect();
    let (mids, matrix) = similarity_matrix(&sets, &weights)?;
    let mut long = Table::new("similarity_long", &["building_a", "building_b", "metric"]);
    for (a, row) in mids.iter().zip(&matrix) {
        for (b, v) in mids.iter().zip(row) {
            long.push(vec![a.0.into(), b.0.into(), (*v).into()]);
        }
    }

    let mut reuse = Table::new(
        "reuse",
        &[
            "target_building",
            "selected_building",
            "metric",
            "relative_nrmse",
            "components",
        ],
    );
    if n > 1 {
        for (j, id) in ids.iter().enumerate() {
            let mut candidates = sets.clone();
            let target = candidates.remove(id).expect("every building has scores");
            let (sel, d) = select_reuse_model(&target, &candidates, &weights)?;
            let i = ids
                .iter()
                .position(|x| *x == sel)
                .ok_or_else(|| HarnessError::Other(format!("unknown building {sel}")))?;
            reuse.push(vec![
                id.0.into(),
                sel.0.into(),
                d.into(),
                relative(i, j).into(),
                k.into(),
            ]);
        }
    }

    out.figures.push(Figure::plotted(
        transfer,
        PlotKind::heatmap("train_building", "target_building", "relative_nrmse"),
    ));
    out.figures
        .push(Figure::plain(matrix_table("similarity", &mids, &matrix)));
    out.figures.push(Figure::plotted(
        long,
        PlotKind::heatmap("building_a", "building_b", "metric"),
    ));
    if !reuse.is_empty() {
        out.figures.push(Figure::plain(reuse));
    }
    Ok(())
}
