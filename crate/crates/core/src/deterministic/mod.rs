//! Deterministic companions of the stochastic dynamics: the mean-field path
//! `ρ(t)`, its step-frozen variant `ρ^δ(t)`, the first-order error field
//! `E(t)` and closed-form error bounds.

mod bounds;
mod efield;
mod rho;

pub use bounds::{e_growth_bound, euler_bound, midpoint_bound, BoundReport};
pub use efield::{solve_error_field, solve_rho_and_error_field, Orientation};
pub use rho::{solve_rho, solve_rho_delta, RHO_TOLERANCE};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulate::RhoPath;

/// Integration grid: `steps` equal steps covering `[0, t_end]`, keeping every
/// `record_every`-th state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeGrid<T> {
    pub t_end: T,
    pub steps: usize,
    pub record_every: usize,
}

impl<T: Scalar> OdeGrid<T> {
    /// The coarsest uniform grid with step at most `h` that ends exactly at
    /// `t_end`.
    pub fn new(t_end: T, h: T) -> Result<Self> {
        if !(t_end >= T::zero() && t_end.is_finite()) {
            return Err(Error::config(format!("t_end must be finite and >= 0, got {t_end}")));
        }
        if !(h > T::zero() && h.is_finite()) {
            return Err(Error::config(format!("step h must be positive, got {h}")));
        }
        let steps = (t_end / h - T::lit(1e-9)).ceil().max(T::zero()).to_usize().unwrap_or(0);
        Ok(Self {
            t_end,
            steps,
            record_every: 1,
        })
    }

    /// Default step `min(δ, T/2000)`.
    pub fn default_for(t_end: T, delta: Option<T>) -> Result<Self> {
        let base = t_end / T::lit(2000.0);
        let h = delta.map_or(base, |d| d.min(base));
        Self::new(t_end, if h > T::zero() { h } else { T::one() })
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }

    pub fn h(&self) -> T {
        if self.steps == 0 {
            T::zero()
        } else {
            self.t_end / T::from_count(self.steps)
        }
    }

    pub fn time(&self, step: usize) -> T {
        if step == self.steps {
            self.t_end
        } else {
            T::from_count(step) * self.h()
        }
    }
}

/// A sampled solution path.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub solver_step: T,
    /// `sup_t ‖y(t)‖∞` over every solver step, recorded or not.
    pub sup_abs: T,
    /// Largest distance by which a clamped solution left `[0,1]`.
    pub max_excursion: T,
}

impl<T: Scalar> OdeSolution<T> {
    pub fn last(&self) -> &[T] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Mean over sites of each recorded state.
    pub fn means(&self) -> Vec<T> {
        self.states
            .iter()
            .map(|s| s.iter().copied().sum::<T>() / T::from_count(s.len().max(1)))
            .collect()
    }

    /// Linear interpolation between recorded states (exact at recorded
    /// times); clamps outside the recorded range.
    pub fn interpolate(&self, t: T, out: &mut [T]) {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            out.copy_from_slice(&self.states[0]);
            return;
        }
        if k == self.times.len() {
            out.copy_from_slice(self.last());
            return;
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { T::zero() };
        let tol = T::lit(1e-9) * t1.abs().max(T::one());
        if (t - t0).abs() <= tol {
            out.copy_from_slice(&self.states[k - 1]);
            return;
        }
        for ((o, &a), &b) in out.iter_mut().zip(&self.states[k - 1]).zip(&self.states[k]) {
            *o = a + w * (b - a);
        }
    }
}

impl<T: Scalar> RhoPath<T> for OdeSolution<T> {
    fn rho_at(&self, t: T, out: &mut [T]) {
        self.interpolate(t, out)
    }
}

/// Classical fourth-order Runge–Kutta on `grid`. `rhs(t, y, dy)` evaluates the
/// vector field; `project` is applied after every step and returns the size
/// of any correction it made.
pub fn integrate_rk4<T, F, P>(mut rhs: F, y0: &[T], grid: &OdeGrid<T>, mut project: P) -> Result<OdeSolution<T>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]) -> Result<()>,
    P: FnMut(&mut [T]) -> Result<T>,
{
    let n = y0.len();
    let h = grid.h();
    let half = T::lit(0.5) * h;
    let sixth = h / T::lit(6.0);
    let sup = |y: &[T]| y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut y = y0.to_vec();
    let mut sol = OdeSolution {
        times: vec![T::zero()],
        states: vec![y.clone()],
        solver_step: h,
        sup_abs: sup(&y),
        max_excursion: T::zero(),
    };
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
        vec![T::zero(); n],
    );
    for step in 0..grid.steps {
        let t = grid.time(step);
        rhs(t, &y, &mut k1)?;
        for i in 0..n {
            tmp[i] = y[i] + half * k1[i];
        }
        rhs(t + half, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + half * k2[i];
        }
        rhs(t + half, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(t + h, &tmp, &mut k4)?;
        for i in 0..n {
            y[i] = y[i] + sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Solver(format!("non-finite solution at component {i}, t = {t}")));
        }
        sol.max_excursion = sol.max_excursion.max(project(&mut y)?);
        sol.sup_abs = sol.sup_abs.max(sup(&y));
        if (step + 1) % grid.record_every == 0 || step + 1 == grid.steps {
            sol.times.push(grid.time(step + 1));
            sol.states.push(y.clone());
        }
    }
    Ok(sol)
}

/// Clamps every entry into `[0,1]`, failing on excursions beyond `tol`.
pub(crate) fn clamp_probabilities<T: Scalar>(y: &mut [T], tol: T) -> Result<T> {
    let mut worst = T::zero();
    for (i, v) in y.iter_mut().enumerate() {
        let ex = (-*v).max(*v - T::one()).max(T::zero());
        if ex > tol {
            return Err(Error::Solver(format!(
                "component {i} left [0,1] by {ex}; reduce the step size"
            )));
        }
        worst = worst.max(ex);
        *v = v.max(T::zero()).min(T::one());
    }
    Ok(worst)
}
