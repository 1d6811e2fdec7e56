use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `sup |tanh''|`, attained at `tanh(x) = ±1/√3` (value `4/(3√3) ≈ 0.76980`).
pub const TANH_CURVATURE_BOUND: f64 = 0.7699;

/// Scalar link `f` mapping a potential to a nonnegative transition rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link<T> {
    /// `max(floor, offset + scale·v)`.
    LinearWithFloor { scale: T, offset: T, floor: T },
    /// `½(1 + sign·tanh(gain·v + field))` with `sign = ±1`.
    TanhIsing { sign: T, gain: T, field: T },
    /// A state-independent rate.
    Constant(T),
}

impl<T: Scalar> Link<T> {
    pub fn linear(scale: T) -> Self {
        Link::LinearWithFloor {
            scale,
            offset: T::zero(),
            floor: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: T| v.is_finite();
        match *self {
            Link::LinearWithFloor { scale, offset, floor } => {
                if !(finite(scale) && finite(offset) && finite(floor)) || floor < T::zero() {
                    return Err(Error::config(
                        "linear-with-floor link needs finite parameters and floor >= 0",
                    ));
                }
            }
            Link::TanhIsing { sign, gain, field } => {
                if sign.abs() != T::one() || !finite(gain) || !finite(field) {
                    return Err(Error::config("tanh-ising link needs sign ±1 and finite gain/field"));
                }
            }
            Link::Constant(c) => {
                if !finite(c) || c < T::zero() {
                    return Err(Error::config("constant link rate must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, v: T) -> T {
        match *self {
            Link::LinearWithFloor { scale, offset, floor } => (offset + scale * v).max(floor),
            Link::TanhIsing { sign, gain, field } => T::lit(0.5) * (T::one() + sign * (gain * v + field).tanh()),
            Link::Constant(c) => c,
        }
    }

    /// `f'(v)` (one-sided at the floor kink of the linear link).
    #[inline]
    pub fn slope(&self, v: T) -> T {
        match *self {
            Link::LinearWithFloor { scale, offset, floor } => {
                if offset + scale * v >= floor {
                    scale
                } else {
                    T::zero()
                }
            }
            Link::TanhIsing { sign, gain, field } => {
                let t = (gain * v + field).tanh();
                T::lit(0.5) * sign * gain * (T::one() - t * t)
            }
            Link::Constant(_) => T::zero(),
        }
    }

    /// Every supported link is monotone, so the supremum over an interval
    /// sits at an endpoint.
    pub fn sup_over(&self, lo: T, hi: T) -> T {
        self.eval(lo).max(self.eval(hi))
    }

    /// Global bound on `|f'|`.
    pub fn slope_bound(&self) -> T {
        match *self {
            Link::LinearWithFloor { scale, .. } => scale.abs(),
            Link::TanhIsing { gain, .. } => T::lit(0.5) * gain.abs(),
            Link::Constant(_) => T::zero(),
        }
    }

    /// Global bound on `|f''|` (zero for piecewise linear links).
    pub fn curvature_bound(&self) -> T {
        match *self {
            Link::TanhIsing { gain, .. } => T::lit(0.5 * TANH_CURVATURE_BOUND) * gain * gain,
            _ => T::zero(),
        }
    }
}
