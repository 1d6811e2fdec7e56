use serde::{Deserialize, Serialize};

use super::{clamp_probabilities, integrate_rk4, OdeGrid, OdeSolution, RHO_TOLERANCE};
use crate::error::{check_len, Error, Result};
use crate::fastsum::Workspace;
use crate::model::RateModel;
use crate::scalar::Scalar;

/// Which Jacobian product drives the error field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `dE_i/dt = Σ_j ∂_j drift_i(ρ) E_j + ½ Σ_{j≠i} ∂_j drift_i(ρ) drift_j(ρ)`.
    #[default]
    Direct,
    /// `dE_i/dt = Σ_j ∂_i drift_j(ρ) E_j + ½ Σ_{j≠i} ∂_i drift_j(ρ) drift_j(ρ)`.
    Transposed,
}

fn apply<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    orientation: Orientation,
    x: &[T],
    w: &[T],
    out: &mut [T],
    off_diagonal: bool,
    ws: &mut Workspace<T>,
) {
    match orientation {
        Orientation::Direct => model.jacobian_apply_into(x, w, out, off_diagonal, ws),
        Orientation::Transposed => model.jacobian_transpose_apply_into(x, w, out, off_diagonal, ws),
    }
}

/// Right-hand side of the error equation at a given `ρ`.
struct ErrorRhs<T: Scalar> {
    drift: Vec<T>,
    tmp: Vec<T>,
    ws: Workspace<T>,
}

impl<T: Scalar> ErrorRhs<T> {
    fn new<M: RateModel<T> + ?Sized>(model: &M) -> Self {
        let n = model.size();
        Self {
            drift: vec![T::zero(); n],
            tmp: vec![T::zero(); n],
            ws: model.new_workspace(),
        }
    }

    /// `dE = A(ρ) E + ½ A*(ρ) drift(ρ)`; `drift` must already hold drift(ρ).
    fn eval<M: RateModel<T> + ?Sized>(&mut self, model: &M, o: Orientation, rho: &[T], e: &[T], de: &mut [T]) {
        apply(model, o, rho, e, de, false, &mut self.ws);
        apply(model, o, rho, &self.drift, &mut self.tmp, true, &mut self.ws);
        let half = T::lit(0.5);
        for (d, &f) in de.iter_mut().zip(&self.tmp) {
            *d = *d + half * f;
        }
    }
}

/// Integrates `ρ` and the error field `E` (with `E(0) = 0`) as one system.
/// Returns `(ρ, E)`; `E.sup_abs` is `sup_t ‖E(t)‖∞` over every solver step.
pub fn solve_rho_and_error_field<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    rho0: &[T],
    grid: &OdeGrid<T>,
    orientation: Orientation,
) -> Result<(OdeSolution<T>, OdeSolution<T>)> {
    let n = model.size();
    check_len("rho0", rho0.len(), n)?;
    let mut y0 = rho0.to_vec();
    y0.resize(2 * n, T::zero());
    let mut rhs = ErrorRhs::new(model);
    let tol = T::lit(RHO_TOLERANCE);
    let mut sup_e = T::zero();
    let joint = integrate_rk4(
        |_, y, dy| {
            let (rho, e) = y.split_at(n);
            let (drho, de) = dy.split_at_mut(n);
            model.drift_into(rho, &mut rhs.drift, &mut rhs.ws);
            drho.copy_from_slice(&rhs.drift);
            rhs.eval(model, orientation, rho, e, de);
            Ok(())
        },
        &y0,
        grid,
        |y| {
            let (rho, e) = y.split_at_mut(n);
            sup_e = e.iter().fold(sup_e, |m, v| m.max(v.abs()));
            clamp_probabilities(rho, tol)
        },
    )?;
    let split = |lo: usize| -> Vec<Vec<T>> { joint.states.iter().map(|s| s[lo..lo + n].to_vec()).collect() };
    let rho = OdeSolution {
        times: joint.times.clone(),
        states: split(0),
        solver_step: joint.solver_step,
        sup_abs: T::one().min(joint.sup_abs),
        max_excursion: joint.max_excursion,
    };
    let e = OdeSolution {
        times: joint.times.clone(),
        states: split(n),
        solver_step: joint.solver_step,
        sup_abs: sup_e,
        max_excursion: T::zero(),
    };
    Ok((rho, e))
}

/// Integrates the error field along a previously computed `ρ` path, which is
/// reconstructed between its recorded times by cubic Hermite interpolation
/// using `drift(ρ)` as the derivative.
pub fn solve_error_field<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    rho_solution: &OdeSolution<T>,
    grid: &OdeGrid<T>,
    orientation: Orientation,
) -> Result<OdeSolution<T>> {
    let n = model.size();
    let covered = rho_solution.times.last().copied().unwrap_or(T::zero());
    if rho_solution.times.is_empty() || covered < grid.t_end * (T::one() - T::lit(1e-9)) {
        return Err(Error::config(format!(
            "rho solution covers [0, {covered}] but the error field needs [0, {}]",
            grid.t_end
        )));
    }
    check_len("rho state", rho_solution.states[0].len(), n)?;
    let mut rhs = ErrorRhs::new(model);
    let mut interp = Hermite::new(n);
    let mut rho = vec![T::zero(); n];
    integrate_rk4(
        |t, e, de| {
            interp.eval(model, rho_solution, t, &mut rho, &mut rhs.ws);
            model.drift_into(&rho, &mut rhs.drift, &mut rhs.ws);
            rhs.eval(model, orientation, &rho, e, de);
            Ok(())
        },
        &vec![T::zero(); n],
        grid,
        |_| Ok(T::zero()),
    )
}

struct Hermite<T> {
    interval: Option<usize>,
    f0: Vec<T>,
    f1: Vec<T>,
}

impl<T: Scalar> Hermite<T> {
    fn new(n: usize) -> Self {
        Self {
            interval: None,
            f0: vec![T::zero(); n],
            f1: vec![T::zero(); n],
        }
    }

    fn eval<M: RateModel<T> + ?Sized>(
        &mut self,
        model: &M,
        sol: &OdeSolution<T>,
        t: T,
        out: &mut [T],
        ws: &mut Workspace<T>,
    ) {
        let last = sol.times.len() - 1;
        if last == 0 {
            out.copy_from_slice(&sol.states[0]);
            return;
        }
        let k = sol.times.partition_point(|&s| s <= t).clamp(1, last) - 1;
        if self.interval != Some(k) {
            model.drift_into(&sol.states[k], &mut self.f0, ws);
            model.drift_into(&sol.states[k + 1], &mut self.f1, ws);
            self.interval = Some(k);
        }
        let (t0, t1) = (sol.times[k], sol.times[k + 1]);
        let h = t1 - t0;
        let s = ((t - t0) / h).max(T::zero()).min(T::one());
        let (two, three) = (T::lit(2.0), T::lit(3.0));
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        let (a, b) = (&sol.states[k], &sol.states[k + 1]);
        for (i, o) in out.iter_mut().enumerate() {
            let v = h00 * a[i] + h10 * h * self.f0[i] + h01 * b[i] + h11 * h * self.f1[i];
            *o = v.max(T::zero()).min(T::one());
        }
    }
}
