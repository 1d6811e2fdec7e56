use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{check_model_len, transition_probability_unchecked, Recorder, SimConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::fastsum::Workspace;
use crate::model::RateModel;
use crate::rng::{Domain, StreamRng};
use crate::scalar::Scalar;
use crate::state::SpinState;

/// Largest tolerated round-off excursion of the midpoint predictor.
pub const PREDICTOR_TOLERANCE: f64 = 1e-9;

/// Where the rates of a decoupled step are frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScheme {
    /// At the state at the start of the step.
    Euler,
    /// At the half-step predictor `z + ½δ·drift(z)`.
    Midpoint,
}

impl GridScheme {
    /// Checks the step-size restriction of the scheme.
    pub fn check_delta<T: Scalar, M: RateModel<T> + ?Sized>(self, model: &M, delta: T) -> Result<()> {
        if self == GridScheme::Midpoint {
            let max = model.norm_constants().max_midpoint_delta();
            if delta > max {
                return Err(Error::config(format!(
                    "midpoint requires delta <= 2/||q||_inf = {max}, got delta = {delta}"
                )));
            }
        }
        Ok(())
    }
}

/// `z ← x + ½δ·drift(x)`, clamped to `[0,1]`; excursions beyond round-off
/// are errors.
pub(crate) fn midpoint_predictor<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    x: &[T],
    delta: T,
    z: &mut [T],
    ws: &mut Workspace<T>,
) -> Result<()> {
    model.drift_into(x, z, ws);
    let half = T::lit(0.5) * delta;
    let tol = T::lit(PREDICTOR_TOLERANCE);
    for (i, zi) in z.iter_mut().enumerate() {
        let p = x[i] + half * *zi;
        if !(p >= -tol && p <= T::one() + tol) {
            return Err(Error::Solver(format!(
                "midpoint predictor left [0,1] at site {i} (value {p}); reduce delta"
            )));
        }
        *zi = p.max(T::zero()).min(T::one());
    }
    Ok(())
}

/// Fills `up`/`down` with the rates that a decoupled step started from `eta`
/// freezes over the interval.
#[allow(clippy::too_many_arguments)]
pub(crate) fn frozen_rates<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    scheme: GridScheme,
    eta: &SpinState,
    delta: T,
    up: &mut [T],
    down: &mut [T],
    scratch: &mut [T],
    ws: &mut Workspace<T>,
) -> Result<()> {
    eta.write_real(scratch);
    if scheme == GridScheme::Midpoint {
        let x = scratch.to_vec();
        midpoint_predictor(model, &x, delta, scratch, ws)?;
    }
    model.rates_into(scratch, up, down, ws);
    check_rates(up, down)
}

pub(crate) fn check_rates<T: Scalar>(up: &[T], down: &[T]) -> Result<()> {
    for (i, (&u, &d)) in up.iter().zip(down).enumerate() {
        if !(u >= T::zero() && d >= T::zero() && u.is_finite() && d.is_finite()) {
            return Err(Error::Model(format!("site {i} has invalid rates ({u}, {d})")));
        }
    }
    Ok(())
}

/// Site-decoupled simulation on the grid `t_k = kδ`: rates are frozen over
/// each interval and every site makes an independent two-state transition.
/// Site `i` of step `k` consumes the `i`-th uniform of grid stream `k`.
pub fn simulate_grid<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
    scheme: GridScheme,
) -> Result<TrajectoryRecord<T>> {
    let (steps, stride) = cfg.grid_plan()?;
    let delta = cfg.require_delta()?;
    scheme.check_delta(model, delta)?;
    let start = Instant::now();
    let n = model.size();
    let mut eta = cfg.init.realize(n, cfg.seed)?;
    check_model_len(model, &eta)?;
    let mut ws = model.new_workspace();
    let (mut up, mut down, mut scratch) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut rec = Recorder::new(cfg.snapshots, n);
    let mut events = 0u64;
    for k in 0..=steps {
        if k % stride == 0 {
            rec.record(T::from_count(k) * delta, &eta, events);
        }
        if k == steps {
            break;
        }
        frozen_rates(model, scheme, &eta, delta, &mut up, &mut down, &mut scratch, &mut ws)?;
        let mut rng = StreamRng::new(cfg.seed, Domain::Grid, k as u64);
        events += decoupled_step(&mut eta, &up, &down, delta, &mut rng);
    }
    Ok(rec.finish(eta, events, start))
}

/// One independent two-state transition per site; returns the number of
/// sites that changed.
fn decoupled_step<T: Scalar>(eta: &mut SpinState, up: &[T], down: &[T], delta: T, rng: &mut StreamRng) -> u64 {
    let mut changed = 0;
    for i in 0..eta.len() {
        let cur = eta.is_set(i);
        let p = transition_probability_unchecked(up[i], down[i], cur, delta);
        let next = rng.uniform::<T>() < p;
        if next != cur {
            eta.set(i, next);
            changed += 1;
        }
    }
    changed
}

pub fn simulate_euler<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
) -> Result<TrajectoryRecord<T>> {
    simulate_grid(model, cfg, GridScheme::Euler)
}

pub fn simulate_midpoint<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
) -> Result<TrajectoryRecord<T>> {
    simulate_grid(model, cfg, GridScheme::Midpoint)
}

/// A deterministic path `t ↦ ρ(t) ∈ [0,1]^n`.
pub trait RhoPath<T> {
    fn rho_at(&self, t: T, out: &mut [T]);
}

impl<T, F: Fn(T, &mut [T])> RhoPath<T> for F {
    fn rho_at(&self, t: T, out: &mut [T]) {
        self(t, out)
    }
}

/// Independent sites driven by a prescribed path: site `i` flips with rates
/// `q_i^±(ρ(kδ))` on `[kδ, (k+1)δ)`, independently of every other site.
pub fn simulate_independent_sites<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
    rho: &dyn RhoPath<T>,
) -> Result<TrajectoryRecord<T>> {
    let (steps, stride) = cfg.grid_plan()?;
    let delta = cfg.require_delta()?;
    let start = Instant::now();
    let n = model.size();
    let mut eta = cfg.init.realize(n, cfg.seed)?;
    check_model_len(model, &eta)?;
    let mut ws = model.new_workspace();
    let (mut up, mut down, mut r) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut rec = Recorder::new(cfg.snapshots, n);
    let mut events = 0u64;
    for k in 0..=steps {
        let t = T::from_count(k) * delta;
        if k % stride == 0 {
            rec.record(t, &eta, events);
        }
        if k == steps {
            break;
        }
        rho.rho_at(t, &mut r);
        model.rates_into(&r, &mut up, &mut down, &mut ws);
        check_rates(&up, &down)?;
        let mut rng = StreamRng::new(cfg.seed, Domain::Independent, k as u64);
        events += decoupled_step(&mut eta, &up, &down, delta, &mut rng);
    }
    Ok(rec.finish(eta, events, start))
}
