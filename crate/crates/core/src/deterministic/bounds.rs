use serde::Serialize;

use crate::model::NormConstants;
use crate::scalar::Scalar;

/// Strong error bound of the Euler scheme:
/// `4 n δ T ‖q‖∞ ‖D*q‖₁ exp(2T(‖q‖∞ + ‖D*q‖₁))`.
pub fn euler_bound<T: Scalar>(norms: &NormConstants<T>, n: usize, delta: T, t_end: T) -> T {
    let growth = (T::lit(2.0) * t_end * (norms.q_inf + norms.dstar_q_1)).exp();
    T::lit(4.0) * T::from_count(n) * delta * t_end * norms.q_inf * norms.dstar_q_1 * growth
}

/// Strong error bound of the midpoint scheme, returned as `(α, bound)` with
/// `bound = 10 α (T+1) exp(2T(‖q‖∞ + ‖D*q‖₁))`.
pub fn midpoint_bound<T: Scalar>(norms: &NormConstants<T>, n: usize, delta: T, t_end: T) -> (T, T) {
    let one = T::one();
    let q = norms.q_inf;
    let d1 = norms.dstar_q_1;
    let alpha = T::from_count(n) * delta * delta * q * (one + q) * (one + d1) * (norms.big_gamma_n + d1)
        + delta * q * norms.gamma_n
        + delta.sqrt() * q.sqrt() * norms.dstar_q_21;
    let growth = (T::lit(2.0) * t_end * (q + d1)).exp();
    (alpha, T::lit(10.0) * alpha * (t_end + one) * growth)
}

/// Growth bound `½ ‖q‖∞ ‖D*q‖₁ T exp(T ‖Dq‖₁)` on `sup_{t≤T} ‖E(t)‖∞`.
pub fn e_growth_bound<T: Scalar>(norms: &NormConstants<T>, t_end: T) -> T {
    T::lit(0.5) * norms.q_inf * norms.dstar_q_1 * t_end * (t_end * norms.d_q_1).exp()
}

/// All bounds for one `(n, δ, T)` with their inputs.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport<T> {
    pub n: usize,
    pub delta: T,
    pub t_end: T,
    pub norms: NormConstants<T>,
    pub euler_bound: T,
    pub midpoint_alpha: T,
    pub midpoint_bound: T,
    pub e_growth_bound: T,
}

impl<T: Scalar> BoundReport<T> {
    pub fn evaluate(norms: NormConstants<T>, n: usize, delta: T, t_end: T) -> Self {
        let (midpoint_alpha, midpoint_bound) = midpoint_bound(&norms, n, delta, t_end);
        Self {
            n,
            delta,
            t_end,
            euler_bound: euler_bound(&norms, n, delta, t_end),
            midpoint_alpha,
            midpoint_bound,
            e_growth_bound: e_growth_bound(&norms, t_end),
            norms,
        }
    }
}
