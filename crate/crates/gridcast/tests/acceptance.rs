//! Acceptance suite: one line per criterion, `[PASS]` or `[FAIL]`, with the
//! measured values. Criteria marked `expected` decide the exit status; the
//! others are reported only.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use gridcast::config::{parse_override, RunConfig};
use gridcast::experiments::run;
use gridcast::output::write_output;
use gridcast::table::{Cell, Table};
use gridcast::ExperimentKind;
use gridcast_core::changepoint::{bic_penalty, detect_changepoints, estimate_noise_sigma};
use gridcast_core::forecast::{
    fit, predict, Architecture, Forecaster, ForecasterConfig, GrwForecaster, ModelParameters,
    NoiseSpec,
};
use gridcast_core::fpca::{fit_fpca, Profile};
use gridcast_core::lp;
use gridcast_core::metrics::{nmae, nrmse, ForecastLog};
use gridcast_core::mpc::step;
use gridcast_core::sim::apply_action;
use gridcast_core::wasserstein::wasserstein_1d;
use gridcast_core::{AssetSpec, BuildingId, ScenarioDataset, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

#[path = "../../core/tests/support/mod.rs"]
mod support;
use support::lp_oracle::{random_feasible_lp, vertex_optimum};
use support::mpc_oracle::{Instance, B0};
use support::ridge;

const LOAD0: Variable = Variable::Load(BuildingId(0));

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn config(toml: &str, overrides: &[String]) -> RunConfig {
    let o: Vec<_> = overrides
        .iter()
        .map(|s| parse_override(s).unwrap())
        .collect();
    RunConfig::from_toml_with(toml, &o).unwrap()
}

fn num(c: &Cell) -> f64 {
    c.as_f64().expect("numeric cell")
}

fn cell<'a>(t: &Table, row: &'a [Cell], name: &str) -> &'a Cell {
    &row[t.column(name).expect("column")]
}

/// Spearman rank correlation; ties get their average rank.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn lp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let problems: Vec<_> = (0..200)
        .map(|_| {
            let n = rng.random_range(1..=8);
            let m = rng.random_range(1..=5);
            random_feasible_lp(&mut rng, n, m)
        })
        .collect();
    let start = Instant::now();
    let solved: Vec<f64> = problems
        .iter()
        .map(|p| lp::solve(p).unwrap().objective_value)
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let worst = problems
        .iter()
        .zip(&solved)
        .map(|(p, s)| {
            let best = vertex_optimum(p).expect("feasible by construction");
            (s - best).abs() / best.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-6 && secs < 5.0,
        format!("200 LPs, worst relative gap {worst:.2e}, solve time {secs:.3} s"),
    )
}

fn mpc_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = 1 + (seed as usize % 3);
        let inst = Instance::random(&mut rng, t);
        let out = step(
            &inst.state(),
            &inst.forecast(),
            &[inst.asset],
            &inst.weights,
        )
        .unwrap();
        let ok = out.actions[&B0].abs() <= inst.asset.power_capacity_kw + 1e-9;
        let gap = if ok {
            out.objective - inst.grid_best()
        } else {
            f64::INFINITY
        };
        worst = worst.max(gap);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 10.0,
        format!("50 instances, max(LP - grid best) {worst:.2e}, {secs:.2} s"),
    )
}

fn battery_physics() -> Outcome {
    let asset = AssetSpec {
        building_id: B0,
        power_capacity_kw: 50.0,
        energy_capacity_kwh: 200.0,
        round_trip_efficiency: 0.9,
        pv_capacity_kwp: 0.0,
    };
    let mut worst: f64 = 0.0;
    for injected in [0.5, 1.0, 10.0, 37.5, 50.0] {
        let (soc, e_in) = apply_action(0.0, injected, &asset, 1.0);
        let (soc2, e_out) = apply_action(soc, -1e9, &asset, 1.0);
        worst = worst.max((-e_out / e_in - 0.9).abs()).max(soc2.abs());
    }
    outcome(
        worst <= 1e-12,
        format!("max |recovered/injected - 0.9| {worst:.1e}"),
    )
}

/// Mean performance ratio over replicates, by sigma.
fn ratios_by_sigma(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let out = run(ExperimentKind::Noise, cfg).unwrap();
    let t = out.table("noise").unwrap();
    let mut acc: Vec<(f64, f64, usize)> = Vec::new();
    for r in &t.rows {
        let (s, ratio) = (
            num(cell(t, r, "sigma")),
            num(cell(t, r, "performance_ratio")),
        );
        match acc.iter_mut().find(|a| a.0 == s) {
            Some(a) => {
                a.1 += ratio;
                a.2 += 1;
            }
            None => acc.push((s, ratio, 1)),
        }
    }
    acc.into_iter()
        .map(|(s, sum, n)| (s, sum / n as f64))
        .collect()
}

fn perfect_dominance() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 0..5u64 {
        let start = Instant::now();
        let cfg = config(
            "",
            &[
                format!("seed={seed}"),
                "horizon=48".into(),
                "scenario.synthetic.n_buildings=3".into(),
                "scenario.synthetic.n_hours=2880".into(),
                "noise.sigmas=[0.0, 0.1, 0.5, 1.0]".into(),
                "noise.variable_sets=[\"load\"]".into(),
                "noise.replicates=1".into(),
            ],
        );
        assert_eq!(cfg.split_spec(2880).unwrap().test.len(), 720);
        let r = ratios_by_sigma(&cfg);
        let perfect = r.iter().find(|(s, _)| *s == 0.0).unwrap().1;
        let noisy_min = r
            .iter()
            .filter(|(s, _)| *s > 0.0)
            .map(|v| v.1)
            .fold(f64::INFINITY, f64::min);
        let secs = start.elapsed().as_secs_f64();
        pass &= perfect <= 1.0 && perfect <= noisy_min && secs < 120.0;
        lines.push(format!(
            "seed {seed}: perfect {perfect:.4}, best noisy {noisy_min:.4}, {secs:.0} s"
        ));
    }
    outcome(pass, lines.join("; "))
}

fn noise_monotonicity() -> Outcome {
    let sigmas = [0.0, 0.1, 0.25, 0.5, 1.0];
    let per_seed: Vec<Vec<f64>> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = config(
                "",
                &[
                    format!("seed={}", 100 + seed),
                    "horizon=24".into(),
                    "scenario.synthetic.n_hours=1440".into(),
                    format!("noise.sigmas={sigmas:?}"),
                    "noise.variable_sets=[\"all\"]".into(),
                    "noise.replicates=1".into(),
                ],
            );
            ratios_by_sigma(&cfg).iter().map(|v| v.1).collect()
        })
        .collect();
    let mean: Vec<f64> = (0..sigmas.len())
        .map(|k| per_seed.iter().map(|r| r[k]).sum::<f64>() / per_seed.len() as f64)
        .collect();
    let rho = spearman(&sigmas, &mean);
    outcome(
        rho >= 0.8,
        format!("10 seeds, mean ratio by sigma {mean:.4?}, Spearman {rho:.3}"),
    )
}

fn horizon_sweep() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for seed in 0..3u64 {
        let cfg = config(
            "",
            &[
                format!("seed={}", 200 + seed),
                "scenario.synthetic.n_hours=1344".into(),
                "horizon_sweep.horizons=[12, 24, 48, 72]".into(),
            ],
        );
        let out = run(ExperimentKind::Horizon, &cfg).unwrap();
        let t = out.table("horizon").unwrap();
        let ratio: Vec<f64> = t
            .values("performance_ratio")
            .unwrap()
            .into_iter()
            .map(num)
            .collect();
        let best = ratio.iter().copied().fold(f64::INFINITY, f64::min);
        let at48 = ratio[2];
        let times: Vec<f64> = [12, 24, 48, 72]
            .iter()
            .map(|h| out.timings[&format!("horizon_{h:03}")])
            .collect();
        let monotone = times.windows(2).all(|w| w[0] < w[1]);
        let within = at48 <= best * 1.01;
        pass &= within && monotone;
        lines.push(format!(
            "seed {seed}: ratios {ratio:.4?}, T=48 vs best {:+.2}%, times {times:.2?} s",
            100.0 * (at48 / best - 1.0)
        ));
    }
    outcome(pass, lines.join("; "))
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.random_range(10..60);
        let truth: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..100.0)).collect();
        let mut log = ForecastLog::default();
        for _ in 0..rng.random_range(1..6) {
            let h = rng.random_range(1..=5);
            let t = rng.random_range(0..n - h);
            log.push(
                t,
                LOAD0,
                (0..h).map(|_| rng.random_range(0.0..120.0)).collect(),
            );
        }
        if nrmse(&log, LOAD0, &truth).unwrap() < nmae(&log, LOAD0, &truth).unwrap() {
            violations += 1;
        }
    }
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let truth: Vec<f64> = (0..80).map(|_| rng.random_range(1.0..50.0)).collect();
        let offset = if k % 2 == 0 {
            2.5
        } else {
            -rng.random_range(0.1..5.0)
        };
        let mut log = ForecastLog::default();
        let issues = [0usize, 13, 40, 70];
        for &t in &issues {
            log.push(
                t,
                LOAD0,
                truth[t..t + 10].iter().map(|v| v + offset).collect(),
            );
        }
        let level = issues.iter().map(|&t| truth[t]).sum::<f64>() / issues.len() as f64;
        let want = offset.abs() / level;
        for got in [
            nmae(&log, LOAD0, &truth).unwrap(),
            nrmse(&log, LOAD0, &truth).unwrap(),
        ] {
            worst = worst.max((got - want).abs() / want);
        }
    }
    outcome(
        violations == 0 && worst <= 1e-12,
        format!("nRMSE < nMAE in {violations}/1000 logs; constant offset max relative error {worst:.1e}"),
    )
}

fn grw_statistics() -> Outcome {
    let (t_h, draws, level, sigma) = (48usize, 10_000usize, 10.0, 1.0);
    let n = t_h + 1;
    let ds = ScenarioDataset::from_vecs(
        vec![vec![level; n]],
        vec![0.0; n],
        vec![1.0; n],
        vec![0.5; n],
    )
    .unwrap();
    let mut grw = GrwForecaster::for_variables(&ds, NoiseSpec { sigma, seed: 5 }, vec![LOAD0])
        .unwrap()
        .with_scale(LOAD0, 1.0);
    let mut log = ForecastLog::default();
    let mut pooled = 0.0;
    for _ in 0..draws {
        let f = grw.forecast(&ds, 0, t_h).unwrap();
        let v = f.load[&BuildingId(0)].clone();
        pooled += v.iter().map(|x| (x - level).powi(2)).sum::<f64>() / t_h as f64;
        log.push(0, LOAD0, v);
    }
    let law = sigma * ((t_h as f64 + 1.0) / 2.0).sqrt() / level;
    let metric = nrmse(&log, LOAD0, ds.variable(LOAD0).unwrap().values()).unwrap();
    let pooled = (pooled / draws as f64).sqrt() / level;
    outcome(
        (metric / law - 1.0).abs() <= 0.05,
        format!(
            "nRMSE {metric:.4} vs law {law:.4} (ratio {:.4}); pooled RMS ratio {:.4}",
            metric / law,
            pooled / law
        ),
    )
}

fn gradients() -> Outcome {
    let mut worst: f64 = 0.0;
    for arch in Architecture::ALL {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = rng.random_range(arch.min_window().max(6)..=20);
            let ch = rng.random_range(1..=2);
            let t = rng.random_range(1..=6);
            let mut m = ModelParameters::init(arch, w, ch, t, &mut rng);
            let xs: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..w * ch).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let ys: Vec<Vec<f64>> = (0..5)
                .map(|_| (0..t).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let xr: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
            let yr: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
            let mut g = vec![0.0; m.params.len()];
            m.loss_and_grad(&xr, &yr, &mut g);
            let eps = 1e-6;
            let mut diff = 0.0;
            for k in 0..g.len() {
                let orig = m.params[k];
                m.params[k] = orig + eps;
                let lp = m.loss(&xr, &yr);
                m.params[k] = orig - eps;
                let lm = m.loss(&xr, &yr);
                m.params[k] = orig;
                diff += ((lp - lm) / (2.0 * eps) - g[k]).powi(2);
            }
            let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
            worst = worst.max(diff.sqrt() / norm);
        }
    }
    outcome(
        worst <= 1e-4,
        format!("3 architectures x 20 instances, worst relative error {worst:.2e}"),
    )
}

fn sinusoid_fit() -> Outcome {
    let (w, h) = (168, 48);
    let series: Vec<f64> = (0..24 * 70)
        .map(|t| 10.0 + 3.0 * (2.0 * PI * t as f64 / 24.0).sin())
        .collect();
    let train_end = 24 * 56;
    let cfg = ForecasterConfig {
        window: w,
        horizon: h,
        seed: 8,
        ..Default::default()
    };
    let (model, _) = fit(Architecture::Linear, &[&series[..train_end]], &cfg).unwrap();
    let score = |f: &dyn Fn(usize) -> Vec<f64>| {
        let mut log = ForecastLog::default();
        for t in train_end..series.len() - h {
            log.push(t, LOAD0, f(t));
        }
        nrmse(&log, LOAD0, &series).unwrap()
    };
    let linear = score(&|t| predict(&model, &[&series[t - w..t]]).unwrap());
    let weights = ridge::fit(&series[..train_end], w, h, 1e-6);
    let oracle = score(&|t| ridge::predict(&weights, &series[t - w..t]));
    let agree = (linear - oracle).abs() <= 0.1 * linear.max(oracle) || linear.max(oracle) < 0.002;
    outcome(
        linear <= 0.02 && agree,
        format!("validation nRMSE {linear:.2e}, ridge {oracle:.2e}"),
    )
}

fn wasserstein_and_fpca() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let n = rng.random_range(1..40);
        (0..n).map(|_| rng.random_range(-50.0..50.0)).collect()
    };
    let mut violations = 0;
    for _ in 0..500 {
        let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
        let ab = wasserstein_1d(&a, &b).unwrap();
        let ok = ab >= 0.0
            && (ab - wasserstein_1d(&b, &a).unwrap()).abs() <= 1e-9
            && wasserstein_1d(&a, &a).unwrap() <= 1e-9
            && ab <= wasserstein_1d(&a, &c).unwrap() + wasserstein_1d(&c, &b).unwrap() + 1e-9;
        violations += usize::from(!ok);
    }
    let days: Vec<Profile> = (0..60)
        .map(|_| {
            core::array::from_fn(|h| {
                40.0 + 8.0 * (h as f64 / 3.0).cos() + rng.random_range(-6.0..6.0)
            })
        })
        .collect();
    let model = fit_fpca(&days, 24).unwrap();
    let back = model.reconstruct(&model.transform(&days));
    let err = days
        .iter()
        .zip(&back)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    outcome(
        violations == 0 && err <= 1e-8,
        format!("axiom violations {violations}/500; k=24 reconstruction error {err:.1e}"),
    )
}

fn changepoint_recovery() -> Outcome {
    let mut hits = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + trial);
        let at = rng.random_range(300..1700);
        let y: Vec<f64> = (0..2000)
            .map(|t| {
                let e: f64 = StandardNormal.sample(&mut rng);
                e + if t >= at { 5.0 } else { 0.0 }
            })
            .collect();
        let r = detect_changepoints(&y, bic_penalty(estimate_noise_sigma(&y), y.len())).unwrap();
        let strongest = r
            .indices
            .iter()
            .zip(&r.scores)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| *i);
        hits += usize::from(strongest.is_some_and(|i| i.abs_diff(at) <= 50));
    }
    outcome(
        hits >= 95,
        format!("{hits}/100 shifts localized within 50 samples"),
    )
}

/// Mean over buildings of the selected candidate's nRMSE change relative to
/// the full-history model.
fn screening_gain(seed: u64) -> f64 {
    let cfg = config(
        "",
        &[
            format!("seed={seed}"),
            "scenario.synthetic.n_hours=4000".into(),
            "scenario.synthetic.shift_at=800".into(),
            "scenario.synthetic.shift_phase_hours=3.0".into(),
        ],
    );
    let out = run(ExperimentKind::Changepoint, &cfg).unwrap();
    let t = out.table("screening").unwrap();
    let picked: Vec<f64> = t
        .rows
        .iter()
        .filter(|r| *cell(t, r, "selected") == Cell::Bool(true))
        .map(|r| num(cell(t, r, "delta_nrmse")))
        .collect();
    assert!(!picked.is_empty());
    picked.iter().sum::<f64>() / picked.len() as f64
}

/// Mean load improvement per update frequency, in config order.
fn online_gains(seed: u64, freqs: &[usize]) -> Vec<f64> {
    let cfg = config(
        "",
        &[
            format!("seed={seed}"),
            "scenario.synthetic.n_hours=10000".into(),
            "split.train=0.5".into(),
            "split.validate=0.1".into(),
            "scenario.synthetic.shift_at=6000".into(),
            "scenario.synthetic.shift_level_factor=1.0".into(),
            "scenario.synthetic.weekly_amplitude=0.3".into(),
            "scenario.synthetic.noise_sigma=0.01".into(),
            "scenario.synthetic.shift_noise_factor=10.0".into(),
            "scenario.synthetic.shift_weekly_factor=0.0".into(),
            format!("online.frequencies={freqs:?}"),
        ],
    );
    let out = run(ExperimentKind::Online, &cfg).unwrap();
    let t = out.table("online").unwrap();
    freqs
        .iter()
        .map(|&f| {
            let g: Vec<f64> = t
                .rows
                .iter()
                .filter(|r| num(cell(t, r, "frequency_hours")) == f as f64)
                .filter(|r| {
                    cell(t, r, "variable")
                        .as_str()
                        .is_some_and(|v| v.starts_with("load_"))
                })
                .map(|r| num(cell(t, r, "improvement")))
                .collect();
            g.iter().sum::<f64>() / g.len() as f64
        })
        .collect()
}

fn directional() -> Outcome {
    let seeds: Vec<u64> = (300..310).collect();
    let screen: Vec<f64> = seeds.par_iter().map(|&s| screening_gain(s)).collect();
    let screen_wins = screen.iter().filter(|d| **d < 0.0).count();

    // Never, then increasingly frequent; gains must rise strictly.
    let freqs = [0usize, 2000, 1000, 500];
    let online: Vec<Vec<f64>> = seeds.par_iter().map(|&s| online_gains(s, &freqs)).collect();
    let online_wins = online
        .iter()
        .filter(|g| g.windows(2).all(|w| w[0] < w[1]))
        .count();
    let mean: Vec<f64> = (0..freqs.len())
        .map(|k| online.iter().map(|g| g[k]).sum::<f64>() / online.len() as f64)
        .collect();
    let mean_screen = screen.iter().sum::<f64>() / screen.len() as f64;
    outcome(
        screen_wins >= 9 && online_wins >= 9,
        format!(
            "screening beats full history in {screen_wins}/10 seeds (mean delta {mean_screen:+.4}); \
             online gain rises with frequency in {online_wins}/10 seeds (mean gains {mean:.4?} for every {freqs:?} h)"
        ),
    )
}

const SMALL: &str = r#"
seed = 5
horizon = 12

[scenario.synthetic]
n_hours = 720

[forecast]
window = 24
max_epochs = 4
models = ["perfect", "persistence", "linear"]
persistence_period = 24

[horizon_sweep]
horizons = [4, 12]

[volume]
durations = [0, 200]

[features]
counts = [0, 1]

[online]
frequencies = [0, 72]
epochs = 2

[noise]
sigmas = [0.0, 0.5]
replicates = 2
variable_sets = ["all", "load"]
"#;

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let cfg = config(SMALL, &[]);
    let mut differing = Vec::new();
    let mut files = 0;
    for kind in ExperimentKind::ALL {
        let runs: Vec<_> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let out = run(kind, &cfg).unwrap();
                let path = write_output(dir.path(), &cfg, &out).unwrap();
                csv_bytes(&path)
            })
            .collect();
        files += runs[0].len();
        if runs[0].is_empty() || runs[0] != runs[1] {
            differing.push(kind.name());
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} experiments, {files} CSV files compared; differing: {differing:?}",
            ExperimentKind::ALL.len()
        ),
    )
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    // (name, expected to pass, check)
    let criteria: [(&str, bool, fn() -> Outcome); 14] = [
        ("lp_oracle", true, lp_oracle),
        ("mpc_oracle", true, mpc_oracle),
        ("battery_physics", true, battery_physics),
        ("perfect_forecast_dominance", true, perfect_dominance),
        ("noise_monotonicity", true, noise_monotonicity),
        ("horizon_sweep", true, horizon_sweep),
        ("metric_identities", true, metric_identities),
        ("grw_statistics", false, grw_statistics),
        ("forecaster_gradients", true, gradients),
        ("linear_sinusoid", true, sinusoid_fit),
        ("wasserstein_and_fpca", true, wasserstein_and_fpca),
        ("changepoint_recovery", true, changepoint_recovery),
        ("directional_reproductions", true, directional),
        ("determinism", true, determinism),
    ];
    let mut unexpected = Vec::new();
    for (name, expected, check) in criteria {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {name}: {} ({:.1} s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if expected && !o.pass {
            unexpected.push(name);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
