use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Value};
use spinsim_core::coupling::{
    bench_speedup, couple_run, normalized_error_experiment, Approximation, BenchSpec, CoupledRun,
};
use spinsim_core::deterministic::{
    e_growth_bound, solve_rho_and_error_field, solve_rho_delta, BoundReport, OdeGrid, Orientation,
};
use spinsim_core::fastsum::{convolve_fft, sum_dense, sum_tree, KernelSpec, Taps, TreeConfig};
use spinsim_core::model::{IsingKac2DModel, ModelConfig, RateModel};
use spinsim_core::rng::replicate_seed;
use spinsim_core::simulate::{
    simulate_euler, simulate_exact, simulate_independent_sites, simulate_midpoint, simulate_poisson_tau_leap,
    GridScheme, InitSpec, Method, SimConfig, TrajectoryRecord,
};
use spinsim_core::Model;

use crate::config::{
    config_err, load_config, parse_init, parse_snapshots, pick, require, LoadedConfig, RunFile, Snapshots,
};
use crate::output::{fmt_f64, pbm, OutDir, Table};

/// What the manifest records about a run besides its outputs.
#[derive(Debug, Default)]
pub struct RunInfo {
    pub config: Value,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Model description or run file (JSON).
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimArgs {
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub sample_every: Option<f64>,
    /// bernoulli:P, fraction:P or an inline JSON init spec.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// none or pbm.
    #[arg(long)]
    pub snapshots: Option<String>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// exact, euler, midpoint, independent or tau-leap.
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Args, Debug)]
pub struct CoupleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated subset of exact,euler,midpoint. The exact process is
    /// always run as the reference.
    #[arg(long)]
    pub methods: Option<String>,
    /// Step of the midpoint scheme; defaults to --delta.
    #[arg(long)]
    pub delta_midpoint: Option<f64>,
    /// Emit normerr.csv (normalized Euler error against the error field)
    /// instead of errors.csv.
    #[arg(long)]
    pub normerr: bool,
    /// direct or transposed.
    #[arg(long)]
    pub orientation: Option<String>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Args, Debug)]
pub struct OdeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Solver step; defaults to min(delta, t_end/2000).
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub sample_every: Option<f64>,
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub orientation: Option<String>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Optional ising-kac-2d description; its side is replaced by each
    /// benchmarked side. Defaults to beta = 1, a = 40/n.
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
    pub sides: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    pub euler_exponent: f64,
    #[arg(long, default_value_t = -0.25, allow_hyphen_values = true)]
    pub midpoint_exponent: f64,
}

#[derive(Args, Debug)]
pub struct FastsumBenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,1024,4096")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 20.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 3)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_orientation(s: Option<String>, file: &RunFile) -> Result<Orientation> {
    match s.as_deref() {
        None => Ok(file.orientation.unwrap_or_default()),
        Some("direct") => Ok(Orientation::Direct),
        Some("transposed") => Ok(Orientation::Transposed),
        Some(other) => Err(config_err(format!(
            "orientation {other:?}: expected direct or transposed"
        ))),
    }
}

fn resolve_init(flag: Option<String>, file: &RunFile) -> Result<InitSpec> {
    match flag {
        Some(s) => parse_init(&s),
        None => Ok(file.init.clone().unwrap_or_default()),
    }
}

fn check_positive(name: &str, v: Option<f64>) -> Result<()> {
    if let Some(v) = v {
        if !(v > 0.0 && v.is_finite()) {
            return Err(config_err(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(())
}

/// Settings shared by `simulate` and `couple` after merging flags with the
/// run file.
struct Resolved {
    loaded: LoadedConfig,
    model: Model,
    cfg: SimConfig<f64>,
    replicates: usize,
    snapshots: Snapshots,
}

fn resolve_sim(model: &ModelArgs, sim: SimArgs, delta_override: Option<f64>) -> Result<Resolved> {
    let loaded = load_config(&model.model)?;
    let run = &loaded.run;
    let t_end = require(pick(sim.t_end, &run.t_end), "t_end")?;
    let delta = delta_override.or(pick(sim.delta, &run.delta));
    let sample_every = pick(sim.sample_every, &run.sample_every);
    check_positive("delta", delta)?;
    check_positive("sample_every", sample_every)?;
    let seed = pick(sim.seed, &run.seed).unwrap_or(0);
    let replicates = pick(sim.replicates, &run.replicates).unwrap_or(1);
    if replicates == 0 {
        return Err(config_err("replicates must be at least 1"));
    }
    let snapshots = parse_snapshots(&pick(sim.snapshots, &run.snapshots).unwrap_or_else(|| "none".into()))?;
    let init = resolve_init(sim.init, run)?;
    let mut cfg = SimConfig::new(t_end, delta, seed)
        .with_init(init)
        .with_snapshots(snapshots == Snapshots::Pbm);
    cfg.sample_every = sample_every;
    cfg.validate()?;
    let model = loaded.build_model()?;
    cfg.init.validate(model.size())?;
    Ok(Resolved {
        loaded,
        model,
        cfg,
        replicates,
        snapshots,
    })
}

fn seed_of(cfg: &SimConfig<f64>, replicates: usize, r: usize) -> u64 {
    if replicates == 1 {
        cfg.seed
    } else {
        replicate_seed(cfg.seed, r as u64)
    }
}

fn rep_prefix(replicates: usize, r: usize) -> String {
    if replicates == 1 {
        String::new()
    } else {
        format!("rep_{r:04}/")
    }
}

fn trajectory_table(rec: &TrajectoryRecord<f64>) -> Table {
    let mut t = Table::new(&["t", "occupancy", "events_cum"]);
    for k in 0..rec.times.len() {
        t.push(vec![
            fmt_f64(rec.times[k]),
            fmt_f64(rec.occupancy[k]),
            rec.events_cum[k].to_string(),
        ]);
    }
    t
}

fn write_snapshots(out: &mut OutDir, dir: &str, rec: &TrajectoryRecord<f64>, shape: [usize; 2]) -> Result<()> {
    if let Some(states) = &rec.snapshots {
        for (k, s) in states.iter().enumerate() {
            out.write(&format!("{dir}state_{k:06}.pbm"), &pbm(s, shape))?;
        }
    }
    Ok(())
}

fn sim_config_echo(r: &Resolved) -> Value {
    json!({
        "model_file": r.loaded.path,
        "model": r.loaded.model,
        "t_end": r.cfg.t_end,
        "delta": r.cfg.delta,
        "seed": r.cfg.seed,
        "sample_every": r.cfg.effective_sample_every(),
        "init": r.cfg.init,
        "replicates": r.replicates,
        "snapshots": r.snapshots,
    })
}

pub fn simulate(args: SimulateArgs, out: &mut OutDir, info: &mut RunInfo) -> Result<()> {
    let method_flag = args.method;
    let r = resolve_sim(&args.model, args.sim, None)?;
    let method: Method = pick(method_flag, &r.loaded.run.method)
        .unwrap_or_else(|| "exact".into())
        .parse()?;
    let mut echo = sim_config_echo(&r);
    echo["method"] = json!(method.as_str());
    info.config = echo;
    info.seed = Some(r.cfg.seed);
    info.replicates = Some(r.replicates);
    if method.uses_grid() {
        let delta = r.cfg.require_delta()?;
        r.cfg.grid_plan()?;
        if method == Method::Midpoint {
            GridScheme::Midpoint.check_delta(&r.model, delta)?;
        }
    }
    let rho_path = if method == Method::Independent {
        let delta = r.cfg.require_delta()?;
        let (steps, _) = r.cfg.grid_plan()?;
        let grid = OdeGrid {
            t_end: steps as f64 * delta,
            steps,
            record_every: 1,
        };
        let rho0 = r.cfg.init.mean::<f64>(r.model.size())?;
        Some(solve_rho_delta(&r.model, &rho0, delta, &grid)?)
    } else {
        None
    };

    let runs: Vec<(TrajectoryRecord<f64>, Option<TauLeapCounts>)> = (0..r.replicates)
        .into_par_iter()
        .map(|k| {
            let mut cfg = r.cfg.clone();
            cfg.seed = seed_of(&r.cfg, r.replicates, k);
            let m = &r.model;
            Ok(match method {
                Method::Exact => (simulate_exact(m, &cfg)?, None),
                Method::Euler => (simulate_euler(m, &cfg)?, None),
                Method::Midpoint => (simulate_midpoint(m, &cfg)?, None),
                Method::Independent => (
                    simulate_independent_sites(m, &cfg, rho_path.as_ref().expect("rho path"))?,
                    None,
                ),
                Method::TauLeap => {
                    let t = simulate_poisson_tau_leap(m, &cfg)?;
                    let extra = (t.invalid_state_count, t.invalid_step_count, t.steps);
                    (t.trajectory, Some(extra))
                }
            })
        })
        .collect::<Result<_, spinsim_core::Error>>()?;

    let shape = r.model.shape();
    let mut summary = Vec::new();
    for (k, (rec, extra)) in runs.iter().enumerate() {
        let pre = rep_prefix(r.replicates, k);
        out.write_csv(&format!("{pre}trajectory.csv"), &trajectory_table(rec))?;
        write_snapshots(out, &format!("{pre}snapshots/"), rec, shape)?;
        let mut s = json!({
            "replicate": k,
            "seed": seed_of(&r.cfg, r.replicates, k),
            "event_count": rec.event_count,
            "final_occupancy": rec.final_state.occupancy::<f64>(),
            "wall_ns": rec.wall_ns as u64,
        });
        if let Some((states, steps_bad, steps)) = extra {
            s["invalid_state_count"] = json!(states);
            s["invalid_step_count"] = json!(steps_bad);
            s["steps"] = json!(steps);
        }
        summary.push(s);
    }
    out.write_json(
        "summary.json",
        &json!({ "method": method.as_str(), "replicates": summary }),
    )
}

/// Invalid states, invalid steps and total steps of a tau-leap run.
type TauLeapCounts = (u64, u64, u64);

fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for name in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Method = name.parse()?;
        if !matches!(m, Method::Exact | Method::Euler | Method::Midpoint) {
            return Err(config_err(format!(
                "couple: method {name:?} cannot be coupled (use exact, euler, midpoint)"
            )));
        }
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    Ok(methods)
}

/// Per-time median across replicates.
fn median_series(series: &[&[f64]]) -> Vec<f64> {
    let len = series.first().map_or(0, |s| s.len());
    (0..len)
        .map(|j| {
            let mut v: Vec<f64> = series.iter().map(|s| s[j]).collect();
            v.sort_by(f64::total_cmp);
            let m = v.len();
            if m % 2 == 1 {
                v[m / 2]
            } else {
                0.5 * (v[m / 2 - 1] + v[m / 2])
            }
        })
        .collect()
}

fn errors_table(times: &[f64], names: &[&str], frac: &[Vec<f64>], cummax: &[Vec<f64>]) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().map(|n| format!("frac_diff_{n}")));
    header.extend(names.iter().map(|n| format!("cummax_{n}")));
    let mut t = Table::new(&header);
    for k in 0..times.len() {
        let mut row = vec![fmt_f64(times[k])];
        row.extend(frac.iter().map(|s| fmt_f64(s[k])));
        row.extend(cummax.iter().map(|s| fmt_f64(s[k])));
        t.push(row);
    }
    t
}

pub fn couple(args: CoupleArgs, out: &mut OutDir, info: &mut RunInfo) -> Result<()> {
    let loaded = load_config(&args.model.model)?;
    let methods = match args
        .methods
        .clone()
        .or_else(|| loaded.run.methods.as_ref().map(|m| m.join(",")))
    {
        Some(s) => parse_methods(&s)?,
        None => vec![Method::Exact, Method::Euler, Method::Midpoint],
    };
    let orientation = parse_orientation(args.orientation.clone(), &loaded.run)?;
    let delta = pick(args.sim.delta, &loaded.run.delta);
    let delta_mid = pick(args.delta_midpoint, &loaded.run.delta_midpoint).or(delta);
    check_positive("delta_midpoint", delta_mid)?;
    let mut approximations = Vec::new();
    for m in &methods {
        match m {
            Method::Euler => approximations.push(Approximation::euler(require(delta, "delta")?)),
            Method::Midpoint => approximations.push(Approximation::midpoint(require(delta_mid, "delta_midpoint")?)),
            _ => {}
        }
    }
    if args.normerr {
        require(delta, "delta")?;
    } else if approximations.is_empty() {
        return Err(config_err("couple: methods must include euler or midpoint"));
    }
    // The sampling default follows the Euler step when there is one.
    let grid_delta = if args.normerr {
        delta
    } else {
        approximations.first().map(|a| a.delta)
    };
    let r = resolve_sim(&args.model, args.sim, grid_delta)?;
    for a in &approximations {
        a.scheme.check_delta(&r.model, a.delta)?;
    }
    let mut echo = sim_config_echo(&r);
    echo["methods"] = json!(methods.iter().map(|m| m.as_str()).collect::<Vec<_>>());
    echo["delta"] = json!(delta);
    echo["delta_midpoint"] = json!(delta_mid);
    echo["normerr"] = json!(args.normerr);
    if args.normerr {
        echo["orientation"] = json!(orientation);
    }
    info.config = echo;
    info.seed = Some(r.cfg.seed);
    info.replicates = Some(r.replicates);

    if args.normerr {
        let delta = require(delta, "delta")?;
        let mut cfg = r.cfg.clone();
        cfg.snapshots = false;
        let s = normalized_error_experiment(&r.model, &cfg, delta, r.replicates, orientation)?;
        let table = Table::from_columns(
            &["t", "observed_mean", "observed_stderr", "predicted"],
            &[&s.times, &s.observed_mean, &s.observed_stderr, &s.predicted],
        );
        out.write_csv("normerr.csv", &table)?;
        return Ok(());
    }

    let runs: Vec<CoupledRun<f64>> = (0..r.replicates)
        .into_par_iter()
        .map(|k| {
            let mut cfg = r.cfg.clone();
            cfg.seed = seed_of(&r.cfg, r.replicates, k);
            couple_run(&r.model, &cfg, &approximations)
        })
        .collect::<Result<_, spinsim_core::Error>>()?;

    let names: Vec<&str> = approximations.iter().map(|a| a.method().as_str()).collect();
    let shape = r.model.shape();
    let mut summary = Vec::new();
    for (k, run) in runs.iter().enumerate() {
        let pre = rep_prefix(r.replicates, k);
        let frac: Vec<Vec<f64>> = run.errors.methods.iter().map(|m| m.frac_diff.clone()).collect();
        let cummax: Vec<Vec<f64>> = run.errors.methods.iter().map(|m| m.cummax.clone()).collect();
        let table = errors_table(&run.errors.times, &names, &frac, &cummax);
        out.write_csv(&format!("{pre}errors.csv"), &table)?;
        let procs = std::iter::once("exact").chain(names.iter().copied());
        for (name, rec) in procs.zip(&run.trajectories) {
            out.write_csv(&format!("{pre}trajectory_{name}.csv"), &trajectory_table(rec))?;
            write_snapshots(out, &format!("{pre}snapshots/{name}/"), rec, shape)?;
        }
        summary.push(json!({
            "replicate": k,
            "seed": seed_of(&r.cfg, r.replicates, k),
            "sup_frac_diff": run.errors.methods.iter().map(|m| (m.approximation.method().as_str(), m.sup_frac_diff)).collect::<std::collections::BTreeMap<_, _>>(),
            "event_count": run.trajectories.iter().map(|t| t.event_count).collect::<Vec<_>>(),
        }));
    }
    if r.replicates > 1 {
        let mut frac = Vec::new();
        let mut cummax = Vec::new();
        for j in 0..names.len() {
            let f: Vec<&[f64]> = runs
                .iter()
                .map(|run| run.errors.methods[j].frac_diff.as_slice())
                .collect();
            let c: Vec<&[f64]> = runs.iter().map(|run| run.errors.methods[j].cummax.as_slice()).collect();
            frac.push(median_series(&f));
            cummax.push(median_series(&c));
        }
        out.write_csv(
            "errors.csv",
            &errors_table(&runs[0].errors.times, &names, &frac, &cummax),
        )?;
    }
    out.write_json("summary.json", &json!({ "replicates": summary }))
}

pub fn ode(args: OdeArgs, out: &mut OutDir, info: &mut RunInfo) -> Result<()> {
    let loaded = load_config(&args.model.model)?;
    let run = &loaded.run;
    let t_end = require(pick(args.t_end, &run.t_end), "t_end")?;
    let delta = pick(args.delta, &run.delta);
    let h = pick(args.h, &run.h);
    let sample_every = pick(args.sample_every, &run.sample_every);
    check_positive("delta", delta)?;
    check_positive("h", h)?;
    check_positive("sample_every", sample_every)?;
    let orientation = parse_orientation(args.orientation, run)?;
    let init = resolve_init(args.init, run)?;
    let mut cfg = SimConfig::new(t_end, delta, 0).with_init(init);
    cfg.sample_every = sample_every;
    cfg.validate()?;
    let model = loaded.build_model()?;
    let rho0 = cfg.init.mean::<f64>(model.size())?;
    let times = cfg.sample_times();
    let every = cfg.effective_sample_every();
    let h = h.unwrap_or_else(|| delta.map_or(t_end / 2000.0, |d| d.min(t_end / 2000.0)));
    let per = ((every / h - 1e-9).ceil() as usize).max(1);
    let intervals = times.len() - 1;
    let grid = OdeGrid {
        t_end: times[intervals],
        steps: intervals * per,
        record_every: per,
    };
    info.config = json!({
        "model_file": loaded.path,
        "model": loaded.model,
        "t_end": t_end,
        "delta": delta,
        "h": grid.h(),
        "sample_every": every,
        "init": cfg.init,
        "orientation": orientation,
    });
    let (rho, e) = solve_rho_and_error_field(&model, &rho0, &grid, orientation)?;
    let mut rt = Table::new(&["t", "mean_rho", "min", "max"]);
    for (t, s) in rho.times.iter().zip(&rho.states) {
        let mean = s.iter().sum::<f64>() / s.len().max(1) as f64;
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rt.push(vec![fmt_f64(*t), fmt_f64(mean), fmt_f64(lo), fmt_f64(hi)]);
    }
    out.write_csv("rho.csv", &rt)?;
    let mut et = Table::new(&["t", "mean_E", "sup_abs_E"]);
    for (t, s) in e.times.iter().zip(&e.states) {
        let mean = s.iter().sum::<f64>() / s.len().max(1) as f64;
        let sup = s.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        et.push(vec![fmt_f64(*t), fmt_f64(mean), fmt_f64(sup)]);
    }
    out.write_csv("efield.csv", &et)?;
    out.write_json(
        "ode_summary.json",
        &json!({
            "solver_step": rho.solver_step,
            "sup_abs_E": e.sup_abs,
            "e_growth_bound": e_growth_bound(&model.norm_constants(), t_end),
            "max_rho_excursion": rho.max_excursion,
        }),
    )
}

pub fn bounds(args: BoundsArgs, out: &mut OutDir, info: &mut RunInfo) -> Result<()> {
    let loaded = load_config(&args.model.model)?;
    let delta = require(pick(args.delta, &loaded.run.delta), "delta")?;
    let t_end = require(pick(args.t_end, &loaded.run.t_end), "t_end")?;
    check_positive("delta", Some(delta))?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(config_err(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    info.config = json!({ "model_file": loaded.path, "model": loaded.model, "delta": delta, "t_end": t_end });
    let model = loaded.build_model()?;
    let report = BoundReport::evaluate(model.norm_constants(), model.size(), delta, t_end);
    let mut value = serde_json::to_value(&report)?;
    value["model"] = serde_json::to_value(&loaded.model)?;
    out.write_json("bounds.json", &value)
}

pub fn bench(args: BenchArgs, out: &mut OutDir, info: &mut RunInfo) -> Result<()> {
    let (beta, a, a_scale, periodic) = match &args.model {
        None => (1.0, None, Some(40.0), false),
        Some(path) => match load_config(path)?.model {
            ModelConfig::IsingKac2D {
                beta,
                a,
                a_scale,
                periodic,
                ..
            } => (beta, a, a_scale, periodic),
            _ => return Err(config_err("bench: model must be of type ising-kac-2d")),
        },
    };
    if a.is_some() == a_scale.is_some() {
        return Err(config_err("bench: give exactly one of \"a\" and \"a_scale\""));
    }
    if args.sides.is_empty() || args.sides.contains(&0) {
        return Err(config_err("bench: sides must be positive"));
    }
    if args.replicates == 0 {
        return Err(config_err("replicates must be at least 1"));
    }
    check_positive("t_end", Some(args.t_end))?;
    info.config = json!({
        "model": { "type": "ising-kac-2d", "beta": beta, "a": a, "a_scale": a_scale, "periodic": periodic },
        "sides": args.sides,
        "replicates": args.replicates,
        "t_end": args.t_end,
        "seed": args.seed,
        "euler_exponent": args.euler_exponent,
        "midpoint_exponent": args.midpoint_exponent,
    });
    info.seed = Some(args.seed);
    info.replicates = Some(args.replicates);
    let spec = BenchSpec {
        sides: args.sides.clone(),
        reps: args.replicates,
        t_end: args.t_end,
        seed: args.seed,
        euler_exponent: args.euler_exponent,
        midpoint_exponent: args.midpoint_exponent,
    };
    let rows = bench_speedup(&spec, |side| match (a, a_scale) {
        (Some(a), _) => IsingKac2DModel::new(side, beta, a, periodic),
        (None, Some(s)) => IsingKac2DModel::with_a_scale(side, beta, s, periodic),
        (None, None) => unreachable!(),
    })?;
    let mut t = Table::new(&[
        "m",
        "n",
        "method",
        "delta",
        "mean_wall_ns",
        "speedup_vs_exact",
        "speedup_stderr",
        "side",
        "reps",
    ]);
    for row in &rows {
        t.push(vec![
            row.m.to_string(),
            row.n.to_string(),
            row.method.clone(),
            fmt_f64(row.delta),
            fmt_f64(row.mean_wall_ns),
            fmt_f64(row.speedup_vs_exact),
            fmt_f64(row.speedup_stderr),
            row.side.to_string(),
            row.reps.to_string(),
        ]);
    }
    out.write_csv("bench.csv", &t)
}

fn gaussian_dense(n: usize, precision: f64, periodic: bool) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = i.abs_diff(j);
            let d = if periodic { d.min(n - d) } else { d } as f64;
            w[i * n + j] = (-precision * d * d).exp();
        }
    }
    w
}

fn time_reps<F: FnMut() -> Result<Vec<f64>>>(reps: usize, mut f: F) -> Result<(f64, Vec<f64>)> {
    let mut total = 0u128;
    let mut last = Vec::new();
    for _ in 0..reps {
        let start = Instant::now();
        last = f()?;
        total += start.elapsed().as_nanos();
    }
    Ok((total as f64 / reps as f64, last))
}

pub fn fastsum_bench(args: FastsumBenchArgs, out: &mut OutDir, info: &mut RunInfo) -> Result<()> {
    if args.sizes.is_empty() || args.sizes.contains(&0) {
        return Err(config_err("fastsum-bench: sizes must be positive"));
    }
    if args.replicates == 0 {
        return Err(config_err("replicates must be at least 1"));
    }
    check_positive("sigma", Some(args.sigma))?;
    info.config = json!({
        "sizes": args.sizes,
        "sigma": args.sigma,
        "replicates": args.replicates,
        "seed": args.seed,
    });
    info.seed = Some(args.seed);
    info.replicates = Some(args.replicates);
    let mut t = Table::new(&["n", "strategy", "periodic", "wall_ns", "max_abs_err_vs_dense"]);
    for &n in &args.sizes {
        let x: Vec<f64> = InitSpec::Bernoulli { p: 0.5 }.realize(n, args.seed)?.to_real();
        let precision = (args.sigma / n as f64).powi(2);
        for periodic in [false, true] {
            let weights = gaussian_dense(n, precision, periodic);
            let (dense_ns, reference) = time_reps(args.replicates, || Ok(sum_dense(&weights, &x)?))?;
            let kernel = KernelSpec::one_d(
                n,
                Taps::Gaussian {
                    precision,
                    spacing: [1.0, 1.0],
                },
                periodic,
                1.0,
            );
            let (fft_ns, fft) = time_reps(args.replicates, || Ok(convolve_fft(&kernel, &x)?))?;
            let err = |v: &[f64]| v.iter().zip(&reference).fold(0.0f64, |a, (p, q)| a.max((p - q).abs()));
            let mut rows = vec![("dense", dense_ns, 0.0), ("fft", fft_ns, err(&fft))];
            if !periodic {
                let points: Vec<f64> = (0..n).map(|i| i as f64).collect();
                let cfg = TreeConfig::default();
                let (tree_ns, tree) = time_reps(args.replicates, || Ok(sum_tree(&points, 1, precision, &x, &cfg)?))?;
                rows.push(("tree", tree_ns, err(&tree)));
            }
            for (name, ns, e) in rows {
                t.push(vec![
                    n.to_string(),
                    name.into(),
                    periodic.to_string(),
                    fmt_f64(ns),
                    fmt_f64(e),
                ]);
            }
        }
    }
    out.write_csv("fastsum_bench.csv", &t)
}
