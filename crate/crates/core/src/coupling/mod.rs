//! Pathwise coupling of the exact process with its decoupled approximations
//! through shared unit-rate Poisson streams (random time change), together
//! with the error experiments built on it.

mod bank;
mod experiments;
mod process;

pub use bank::{Dir, PoissonStreamBank};
pub use experiments::{bench_speedup, normalized_error_experiment, BenchRow, BenchSpec, NormalizedErrorSeries};
pub use process::Scheme;

use std::time::Instant;

use process::{Pending, Process};

use crate::error::{Error, Result};
use crate::model::RateModel;
use crate::scalar::Scalar;
use crate::simulate::{GridScheme, Method, Recorder, SimConfig, TrajectoryRecord};

/// An approximation to couple against the exact process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approximation<T> {
    pub scheme: GridScheme,
    pub delta: T,
}

impl<T: Scalar> Approximation<T> {
    pub fn euler(delta: T) -> Self {
        Self {
            scheme: GridScheme::Euler,
            delta,
        }
    }

    pub fn midpoint(delta: T) -> Self {
        Self {
            scheme: GridScheme::Midpoint,
            delta,
        }
    }

    pub fn method(&self) -> Method {
        match self.scheme {
            GridScheme::Euler => Method::Euler,
            GridScheme::Midpoint => Method::Midpoint,
        }
    }
}

/// Error metrics of one approximation against the exact process.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodErrors<T> {
    pub approximation: Approximation<T>,
    /// `n⁻¹ Σ_i |η_i − η̂_i|` at each sample time.
    pub frac_diff: Vec<T>,
    /// Running maximum of the fraction of disagreeing sites, taken over every
    /// event up to the sample time.
    pub cummax: Vec<T>,
    /// `(nδ)⁻¹ Σ_i (η_i − η̂_i)` at each sample time.
    pub normalized: Vec<T>,
    /// `sup_{t ≤ T} n⁻¹ Σ_i |η_i − η̂_i|` over the whole run.
    pub sup_frac_diff: T,
}

/// Errors of every coupled approximation at the common sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledErrorSeries<T> {
    pub times: Vec<T>,
    pub methods: Vec<MethodErrors<T>>,
}

/// Result of a coupled run: the error series and one trajectory per process
/// (exact first, then the approximations in order).
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun<T> {
    pub errors: CoupledErrorSeries<T>,
    pub trajectories: Vec<TrajectoryRecord<T>>,
}

/// Runs the exact process and every approximation on the streams of one
/// [`PoissonStreamBank`] seeded with `cfg.seed`, from the common initial
/// state `cfg.init`. Events are processed in global time order; disagreement
/// counts are updated at every event, so the running maxima are exact.
pub fn couple_run<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
    approximations: &[Approximation<T>],
) -> Result<CoupledRun<T>> {
    cfg.validate()?;
    let n = model.size();
    let eta0 = cfg.init.realize(n, cfg.seed)?;
    crate::simulate::check_model_len(model, &eta0)?;
    let mut bank = PoissonStreamBank::new(cfg.seed, n);
    let mut procs = vec![Process::new(model, Scheme::Exact, eta0.clone(), &mut bank)?];
    for a in approximations {
        procs.push(Process::new(
            model,
            Scheme::Grid {
                scheme: a.scheme,
                delta: a.delta,
            },
            eta0.clone(),
            &mut bank,
        )?);
    }
    let m = approximations.len();
    let nn = T::from_count(n);
    let mut diff = vec![0usize; m];
    let mut peak = vec![0usize; m];
    let mut signed = vec![0i64; m];
    let mut errors = CoupledErrorSeries {
        times: Vec::new(),
        methods: approximations
            .iter()
            .map(|&a| MethodErrors {
                approximation: a,
                frac_diff: Vec::new(),
                cummax: Vec::new(),
                normalized: Vec::new(),
                sup_frac_diff: T::zero(),
            })
            .collect(),
    };
    let mut recorders: Vec<Recorder<T>> = (0..=m).map(|_| Recorder::new(cfg.snapshots, n)).collect();
    let samples = cfg.sample_times();
    let mut next_sample = 0;
    let start = Instant::now();
    // simultaneous events (shared arrivals) are applied before maxima are
    // taken, so a transient mid-update disagreement never counts
    let mut current = T::zero();

    loop {
        let mut best = (T::infinity(), Pending::Idle, 0usize);
        for (k, p) in procs.iter_mut().enumerate() {
            let (t, action) = p.peek();
            if t < best.0 {
                best = (t, action, k);
            }
        }
        let (t, action, k) = best;
        if t != current {
            for j in 0..m {
                peak[j] = peak[j].max(diff[j]);
            }
            current = t;
        }
        while next_sample < samples.len() && samples[next_sample] < t {
            let ts = samples[next_sample];
            errors.times.push(ts);
            for (j, me) in errors.methods.iter_mut().enumerate() {
                me.frac_diff.push(T::from_count(diff[j]) / nn);
                me.cummax.push(T::from_count(peak[j]) / nn);
                let scale = nn * me.approximation.delta;
                me.normalized.push(T::lit(signed[j] as f64) / scale);
            }
            for (p, r) in procs.iter().zip(recorders.iter_mut()) {
                r.record(ts, &p.eta, p.events);
            }
            next_sample += 1;
        }
        if t > cfg.t_end || action == Pending::Idle {
            break;
        }
        if let Some(i) = procs[k].advance(t, action, &mut bank)? {
            let set = procs[k].eta.is_set(i);
            if k == 0 {
                for j in 0..m {
                    let other = procs[j + 1].eta.is_set(i);
                    if set == other {
                        diff[j] -= 1;
                    } else {
                        diff[j] += 1;
                    }
                    signed[j] += if set { 1 } else { -1 };
                }
            } else {
                let j = k - 1;
                if set == procs[0].eta.is_set(i) {
                    diff[j] -= 1;
                } else {
                    diff[j] += 1;
                }
                signed[j] -= if set { 1 } else { -1 };
            }
        }
    }
    for j in 0..m {
        peak[j] = peak[j].max(diff[j]);
    }
    for (j, me) in errors.methods.iter_mut().enumerate() {
        me.sup_frac_diff = T::from_count(peak[j]) / nn;
    }
    let trajectories = procs
        .into_iter()
        .zip(recorders)
        .map(|(p, r)| {
            let events = p.events;
            r.finish(p.eta, events, start)
        })
        .collect();
    Ok(CoupledRun { errors, trajectories })
}

/// Runs a single process against the streams of `bank`. A process inside
/// [`couple_run`] follows exactly the path this produces for the same seed.
pub fn simulate_with_bank<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
    scheme: Scheme<T>,
    bank: &mut PoissonStreamBank<T>,
) -> Result<TrajectoryRecord<T>> {
    cfg.validate()?;
    let n = model.size();
    if bank.sites() != n {
        return Err(Error::config(format!(
            "stream bank has {} sites, model has {n}",
            bank.sites()
        )));
    }
    let eta0 = cfg.init.realize(n, cfg.seed)?;
    crate::simulate::check_model_len(model, &eta0)?;
    let start = Instant::now();
    let mut p = Process::new(model, scheme, eta0, bank)?;
    let mut rec = Recorder::new(cfg.snapshots, n);
    let samples = cfg.sample_times();
    let mut next_sample = 0;
    loop {
        let (t, action) = p.peek();
        while next_sample < samples.len() && samples[next_sample] < t {
            rec.record(samples[next_sample], &p.eta, p.events);
            next_sample += 1;
        }
        if t > cfg.t_end || action == Pending::Idle {
            break;
        }
        p.advance(t, action, bank)?;
    }
    let events = p.events;
    Ok(rec.finish(p.eta, events, start))
}
