use rayon::prelude::*;
use serde::Serialize;

use super::{couple_run, Approximation};
use crate::deterministic::{solve_rho_and_error_field, OdeGrid, Orientation};
use crate::error::{Error, Result};
use crate::model::RateModel;
use crate::rng::replicate_seed;
use crate::scalar::Scalar;
use crate::simulate::{simulate_euler, simulate_exact, simulate_midpoint, SimConfig};

/// Observed versus predicted normalized Euler error.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedErrorSeries<T> {
    pub times: Vec<T>,
    /// Replicate mean of `(nδ)⁻¹ Σ_i (η_i(t) − η_i^δ(t))`.
    pub observed_mean: Vec<T>,
    /// Standard error of that mean.
    pub observed_stderr: Vec<T>,
    /// `n⁻¹ Σ_i E_i(t)`.
    pub predicted: Vec<T>,
    pub replicates: usize,
}

/// Couples the exact process with the Euler scheme in `replicates`
/// independent runs (replicate `r` uses seed `replicate_seed(cfg.seed, r)`)
/// and compares the mean normalized error with the error field started from
/// the mean initial state.
pub fn normalized_error_experiment<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
    delta: T,
    replicates: usize,
    orientation: Orientation,
) -> Result<NormalizedErrorSeries<T>> {
    if replicates == 0 {
        return Err(Error::config("replicates must be at least 1"));
    }
    cfg.validate()?;
    let times = cfg.sample_times();
    let runs: Vec<Vec<T>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut c = cfg.clone();
            c.seed = replicate_seed(cfg.seed, r as u64);
            c.snapshots = false;
            couple_run(model, &c, &[Approximation::euler(delta)]).map(|run| run.errors.methods[0].normalized.clone())
        })
        .collect::<Result<_>>()?;
    let rr = T::from_count(replicates);
    let mut observed_mean = Vec::with_capacity(times.len());
    let mut observed_stderr = Vec::with_capacity(times.len());
    for j in 0..times.len() {
        let mean = runs.iter().map(|s| s[j]).sum::<T>() / rr;
        let var = if replicates > 1 {
            runs.iter().map(|s| (s[j] - mean) * (s[j] - mean)).sum::<T>() / T::from_count(replicates - 1)
        } else {
            T::zero()
        };
        observed_mean.push(mean);
        observed_stderr.push((var / rr).sqrt());
    }
    let predicted = predicted_error(model, cfg, delta, &times, orientation)?;
    Ok(NormalizedErrorSeries {
        times,
        observed_mean,
        observed_stderr,
        predicted,
        replicates,
    })
}

/// `n⁻¹ Σ_i E_i` at each sample time, integrating with a step no larger than
/// `min(δ, T/2000)` that divides the sampling interval.
fn predicted_error<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
    delta: T,
    times: &[T],
    orientation: Orientation,
) -> Result<Vec<T>> {
    let rho0 = cfg.init.mean::<T>(model.size())?;
    if times.len() < 2 {
        return Ok(vec![T::zero(); times.len()]);
    }
    let every = cfg.effective_sample_every();
    let h0 = delta.min(cfg.t_end / T::lit(2000.0));
    let per = (every / h0 - T::lit(1e-9)).ceil().max(T::one()).to_usize().unwrap_or(1);
    let intervals = times.len() - 1;
    let grid = OdeGrid {
        t_end: times[intervals],
        steps: intervals * per,
        record_every: per,
    };
    let (_, e) = solve_rho_and_error_field(model, &rho0, &grid, orientation)?;
    Ok(e.means())
}

/// Timing benchmark parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec<T> {
    /// Lattice sides to measure.
    pub sides: Vec<usize>,
    pub reps: usize,
    pub t_end: T,
    pub seed: u64,
    /// Euler uses `δ = n^euler_exponent`.
    pub euler_exponent: T,
    /// Midpoint uses `δ = n^midpoint_exponent`.
    pub midpoint_exponent: T,
}

/// Mean wall time of one method at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow<T> {
    pub m: u32,
    pub side: usize,
    pub n: usize,
    pub method: String,
    pub delta: T,
    pub mean_wall_ns: T,
    /// Mean over replicates of the per-replicate ratio exact/method.
    pub speedup_vs_exact: T,
    pub speedup_stderr: T,
    pub reps: usize,
}

fn mean_and_stderr<T: Scalar>(xs: &[T]) -> (T, T) {
    let k = T::from_count(xs.len());
    let mean = xs.iter().copied().sum::<T>() / k;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / T::from_count(xs.len() - 1);
    (mean, (var / k).sqrt())
}

/// Measures exact, Euler and midpoint wall times on models built by `build`
/// for each side. Runs are sequential so timings do not interfere.
pub fn bench_speedup<T, M, F>(spec: &BenchSpec<T>, build: F) -> Result<Vec<BenchRow<T>>>
where
    T: Scalar,
    M: RateModel<T>,
    F: Fn(usize) -> Result<M>,
{
    if spec.reps == 0 {
        return Err(Error::config("reps must be at least 1"));
    }
    let mut rows = Vec::new();
    for &side in &spec.sides {
        let model = build(side)?;
        let n = model.size();
        let nn = T::from_count(n);
        let de = nn.powf(spec.euler_exponent);
        let dm = nn.powf(spec.midpoint_exponent);
        let grid_cfg = |delta: T, seed: u64| {
            let steps = (spec.t_end / delta + T::lit(1e-9)).floor().max(T::one());
            SimConfig::new(spec.t_end, Some(delta), seed).with_sample_every(steps * delta)
        };
        let mut walls = [Vec::new(), Vec::new(), Vec::new()];
        for r in 0..spec.reps {
            let seed = replicate_seed(spec.seed, r as u64);
            let exact_cfg = SimConfig::new(spec.t_end, None, seed).with_sample_every(spec.t_end);
            walls[0].push(T::lit(simulate_exact(&model, &exact_cfg)?.wall_ns as f64));
            walls[1].push(T::lit(simulate_euler(&model, &grid_cfg(de, seed))?.wall_ns as f64));
            walls[2].push(T::lit(simulate_midpoint(&model, &grid_cfg(dm, seed))?.wall_ns as f64));
        }
        for (k, (name, delta)) in [("exact", T::zero()), ("euler", de), ("midpoint", dm)]
            .into_iter()
            .enumerate()
        {
            let ratios: Vec<T> = walls[0]
                .iter()
                .zip(&walls[k])
                .map(|(&e, &w)| e / w.max(T::one()))
                .collect();
            let (speedup, stderr) = mean_and_stderr(&ratios);
            rows.push(BenchRow {
                m: side.max(1).ilog2(),
                side,
                n,
                method: name.to_string(),
                delta,
                mean_wall_ns: mean_and_stderr(&walls[k]).0,
                speedup_vs_exact: speedup,
                speedup_stderr: stderr,
                reps: spec.reps,
            });
        }
    }
    Ok(rows)
}
