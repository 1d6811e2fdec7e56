use std::time::Instant;

use super::{check_model_len, Recorder, SimConfig, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::model::RateModel;
use crate::rng::{Domain, StreamRng};
use crate::scalar::Scalar;
use crate::state::SpinState;

/// Fills `q` with the flip intensities `q(η, i)` and returns their sum.
pub(crate) fn flip_rates<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    eta: &SpinState,
    v: &[T],
    q: &mut [T],
) -> Result<T> {
    let mut total = T::zero();
    for i in 0..q.len() {
        let (up, down) = model.rates_at(i, v[i]);
        let r = if eta.is_set(i) { down } else { up };
        if !(r >= T::zero() && r.is_finite()) {
            return Err(Error::Model(format!("site {i} has invalid rate {r}")));
        }
        q[i] = r;
        total = total + r;
    }
    Ok(total)
}

/// Doob–Gillespie simulation: exponential holding times with the total flip
/// intensity, the flipping site chosen proportionally to its intensity, and
/// potentials updated incrementally by one weight column per event.
///
/// Samples follow the càdlàg convention: the state recorded at time `t`
/// includes every event at times `≤ t`.
pub fn simulate_exact<T: Scalar, M: RateModel<T> + ?Sized>(
    model: &M,
    cfg: &SimConfig<T>,
) -> Result<TrajectoryRecord<T>> {
    cfg.validate()?;
    let start = Instant::now();
    let n = model.size();
    let mut eta = cfg.init.realize(n, cfg.seed)?;
    check_model_len(model, &eta)?;
    let mut ws = model.new_workspace();
    let mut v = model.potentials(&eta.to_real(), &mut ws)?;
    let mut q = vec![T::zero(); n];
    let mut total = flip_rates(model, &eta, &v, &mut q)?;

    let samples = cfg.sample_times();
    let mut rec = Recorder::new(cfg.snapshots, n);
    let mut next_sample = 0;
    let mut rng = StreamRng::new(cfg.seed, Domain::Exact, 0);
    let mut t = T::zero();
    let mut events = 0u64;
    loop {
        let tau = if total > T::zero() {
            t + rng.exp1::<T>() / total
        } else {
            T::infinity()
        };
        while next_sample < samples.len() && samples[next_sample] < tau {
            rec.record(samples[next_sample], &eta, events);
            next_sample += 1;
        }
        if tau > cfg.t_end {
            break;
        }
        t = tau;
        let target = rng.uniform::<T>() * total;
        let mut acc = T::zero();
        let mut site = None;
        for (i, &qi) in q.iter().enumerate() {
            if qi > T::zero() {
                site = Some(i);
                acc = acc + qi;
                if acc > target {
                    break;
                }
            }
        }
        let i = site.expect("positive total rate has a positive site");
        let dx = if eta.flip(i) == 1 { T::one() } else { -T::one() };
        model.update_potentials(i, dx, &mut v);
        events += 1;
        total = flip_rates(model, &eta, &v, &mut q)?;
    }
    Ok(rec.finish(eta, events, start))
}
