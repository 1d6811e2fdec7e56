use std::time::Instant;

use rand_distr::{Distribution, Poisson};

use super::{check_model_len, Recorder, SimConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::model::RateModel;
use crate::rng::{Domain, StreamRng};
use crate::scalar::Scalar;

/// Output of the Poisson tau-leaping demonstrator.
#[derive(Debug, Clone, PartialEq)]
pub struct TauLeapRecord<T> {
    pub trajectory: TrajectoryRecord<T>,
    /// Site-steps whose update left `{0,1}` before clamping.
    pub invalid_state_count: u64,
    /// Steps with at least one such site.
    pub invalid_step_count: u64,
    pub steps: u64,
}

fn poisson_draw(mean: f64, rng: &mut StreamRng) -> i64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map_or(0, |d| d.sample(rng) as i64)
}

/// Naive tau-leaping `η_i ← η_i + Λ⁺ − Λ⁻` with Poisson counts of means
/// `δ(1−η_i)q_i⁺` and `δη_i q_i⁻`. Updates that leave `{0,1}` are counted and
/// clamped back.
pub fn simulate_poisson_tau_leap<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
) -> Result<TauLeapRecord<T>> {
    cfg.validate()?;
    let delta = match cfg.delta {
        Some(d) if d == T::zero() => d,
        _ => cfg.require_delta()?,
    };
    let start = Instant::now();
    let n = model.size();
    let mut eta = cfg.init.realize(n, cfg.seed)?;
    check_model_len(model, &eta)?;
    let (steps, stride) = if delta == T::zero() { (0, 1) } else { cfg.grid_plan()? };
    let mut ws = model.new_workspace();
    let (mut up, mut down, mut x) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut rec = Recorder::new(cfg.snapshots, n);
    let (mut events, mut invalid_sites, mut invalid_steps) = (0u64, 0u64, 0u64);
    for k in 0..=steps {
        if k % stride == 0 {
            rec.record(T::from_count(k) * delta, &eta, events);
        }
        if k == steps {
            break;
        }
        eta.write_real(&mut x);
        model.rates_into(&x, &mut up, &mut down, &mut ws);
        let mut rng = StreamRng::new(cfg.seed, Domain::TauLeap, k as u64);
        let mut step_invalid = false;
        for i in 0..n {
            let occupied = eta.is_set(i);
            let (u, d) = (up[i].as_f64(), down[i].as_f64());
            if !(u >= 0.0 && d >= 0.0 && u.is_finite() && d.is_finite()) {
                return Err(Error::Model(format!("site {i} has invalid rates ({u}, {d})")));
            }
            let dt = delta.as_f64();
            let plus = poisson_draw(if occupied { 0.0 } else { dt * u }, &mut rng);
            let minus = poisson_draw(if occupied { dt * d } else { 0.0 }, &mut rng);
            let raw = i64::from(occupied) + plus - minus;
            if !(0..=1).contains(&raw) {
                invalid_sites += 1;
                step_invalid = true;
            }
            let next = raw >= 1;
            if next != occupied {
                eta.set(i, next);
                events += 1;
            }
        }
        invalid_steps += u64::from(step_invalid);
    }
    Ok(TauLeapRecord {
        trajectory: rec.finish(eta, events, start),
        invalid_state_count: invalid_sites,
        invalid_step_count: invalid_steps,
        steps: steps as u64,
    })
}
