use super::{clamp_probabilities, integrate_rk4, OdeGrid, OdeSolution};
use crate::error::{check_len, Error, Result};
use crate::model::RateModel;
use crate::scalar::Scalar;
use crate::simulate::transition_probability;

/// Largest excursion outside `[0,1]` that is clamped rather than reported.
pub const RHO_TOLERANCE: f64 = 1e-6;

fn check_rho0<T: Scalar>(rho0: &[T], n: usize) -> Result<()> {
    check_len("rho0", rho0.len(), n)?;
    if let Some(i) = rho0.iter().position(|&r| !(r >= T::zero() && r <= T::one())) {
        return Err(Error::Domain(format!("rho0[{i}] = {} is outside [0,1]", rho0[i])));
    }
    Ok(())
}

/// Integrates `dρ/dt = drift(ρ)`.
pub fn solve_rho<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    rho0: &[T],
    grid: &OdeGrid<T>,
) -> Result<OdeSolution<T>> {
    check_rho0(rho0, model.size())?;
    let mut ws = model.new_workspace();
    let tol = T::lit(RHO_TOLERANCE);
    integrate_rk4(
        |_, y, dy| {
            model.drift_into(y, dy, &mut ws);
            Ok(())
        },
        rho0,
        grid,
        |y| clamp_probabilities(y, tol),
    )
}

/// `ρ^δ`: the mean of the independent-site approximation, whose rates are
/// frozen at the last grid point `kδ`. Each interval is solved exactly, so
/// recorded values carry no integration error; `grid` only sets the
/// recording times.
pub fn solve_rho_delta<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    rho0: &[T],
    delta: T,
    grid: &OdeGrid<T>,
) -> Result<OdeSolution<T>> {
    let n = model.size();
    check_rho0(rho0, n)?;
    if !(delta > T::zero() && delta.is_finite()) {
        return Err(Error::config(format!("delta must be positive, got {delta}")));
    }
    let h = grid.h();
    if h > delta * (T::one() + T::lit(1e-9)) {
        return Err(Error::config(format!("step h = {h} exceeds delta = {delta}")));
    }
    let mut ws = model.new_workspace();
    let (mut up, mut down) = (vec![T::zero(); n], vec![T::zero(); n]);
    let mut anchor = rho0.to_vec();
    let mut k = 0usize;
    model.rates_into(&anchor, &mut up, &mut down, &mut ws);
    let mut sol = OdeSolution {
        times: Vec::new(),
        states: Vec::new(),
        solver_step: h,
        sup_abs: T::zero(),
        max_excursion: T::zero(),
    };
    let slack = T::lit(1e-9);
    for step in 0..=grid.steps {
        let t = grid.time(step);
        // advance the anchor to the grid interval containing t
        while T::from_count(k + 1) * delta <= t + slack * delta {
            anchor = evolve(&anchor, &up, &down, delta)?;
            k += 1;
            model.rates_into(&anchor, &mut up, &mut down, &mut ws);
        }
        let s = (t - T::from_count(k) * delta).max(T::zero());
        let state = evolve(&anchor, &up, &down, s)?;
        sol.sup_abs = state.iter().fold(sol.sup_abs, |m, v| m.max(v.abs()));
        if step % grid.record_every == 0 || step == grid.steps {
            sol.times.push(t);
            sol.states.push(state);
        }
    }
    Ok(sol)
}

fn evolve<T: Scalar>(rho: &[T], up: &[T], down: &[T], s: T) -> Result<Vec<T>> {
    rho.iter()
        .enumerate()
        .map(|(i, &r)| {
            let stay = transition_probability(up[i], down[i], true, s)?;
            let enter = transition_probability(up[i], down[i], false, s)?;
            Ok(r * stay + (T::one() - r) * enter)
        })
        .collect()
}
