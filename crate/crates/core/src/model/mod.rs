//! Rate models: the contract consumed by simulators and ODE solvers, the
//! shared potential-form implementation and the concrete models.

mod config;
mod dense;
mod gauss;
mod ising;
mod link;

pub use config::{read_weight_csv, AnyModel, DenseParams, LinkParams, ModelConfig};
pub use dense::DenseModel;
pub use gauss::GaussConv1DModel;
pub use ising::IsingKac2DModel;
pub use link::{Link, TANH_CURVATURE_BOUND};

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::fastsum::{PotentialOperator, Workspace};
use crate::scalar::Scalar;
use crate::state::SpinState;

/// Whether the regularity constants are exact suprema or upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    Exact,
    UpperBound,
}

/// Regularity constants of a rate model.
///
/// `dstar_*` quantities exclude the diagonal `∂_i q_i`; `d_q_1` includes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormConstants<T> {
    /// `‖q‖∞ = max_i sup_x max(q_i⁺(x), q_i⁻(x))`.
    pub q_inf: T,
    /// `‖D*q‖₁ = max_j Σ_{i≠j} sup |∂_j q_i|`.
    pub dstar_q_1: T,
    /// `‖Dq‖₁`, column sums of the full drift Jacobian.
    pub d_q_1: T,
    /// `‖D*q‖∞ = max_i Σ_{j≠i} sup |∂_j q_i|`.
    pub dstar_q_inf: T,
    /// `‖D*q‖₂,₁ = Σ_i (Σ_{j≠i} sup |∂_j q_i|²)^{1/2}`.
    pub dstar_q_21: T,
    /// `γ_n = Σ_{i≠j} sup |∂²_j q_i|`.
    pub gamma_n: T,
    /// `Γ_n = max_i Σ_{j,k≠i} sup |∂_j ∂_k q_i|`.
    pub big_gamma_n: T,
    pub kind: NormKind,
}

impl<T: Scalar> NormConstants<T> {
    pub fn zero() -> Self {
        Self {
            q_inf: T::zero(),
            dstar_q_1: T::zero(),
            d_q_1: T::zero(),
            dstar_q_inf: T::zero(),
            dstar_q_21: T::zero(),
            gamma_n: T::zero(),
            big_gamma_n: T::zero(),
            kind: NormKind::Exact,
        }
    }

    /// Largest midpoint step for which the predictor stays in `[0,1]^n`.
    pub fn max_midpoint_delta(&self) -> T {
        if self.q_inf > T::zero() {
            T::lit(2.0) / self.q_inf
        } else {
            T::infinity()
        }
    }
}

/// A spin system whose rates are smooth functions on `[0,1]^n`.
///
/// Rates are expressed through potentials `v = S x + b`: site `i` flips up at
/// rate `f⁺_i(v_i)` and down at rate `f⁻_i(v_i)`. Implementations are
/// immutable; mutable scratch lives in a caller-owned [`Workspace`].
pub trait RateModel<T: Scalar>: Send + Sync {
    fn size(&self) -> usize;

    /// Lattice extents `[rows, cols]` used for snapshots.
    fn shape(&self) -> [usize; 2] {
        [1, self.size()]
    }

    fn new_workspace(&self) -> Workspace<T> {
        Workspace::new()
    }

    /// `out = S x`.
    fn weights_apply(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>);

    /// The constant offset `b`, if any.
    fn potential_offset(&self) -> Option<&[T]> {
        None
    }

    /// `out = Sᵀ y`.
    fn weights_transpose_apply(&self, y: &[T], out: &mut [T], ws: &mut Workspace<T>);

    /// `s_ij`.
    fn weight(&self, i: usize, j: usize) -> T;

    /// `v += dx · S[:, j]` after `x_j` changes by `dx`.
    fn update_potentials(&self, j: usize, dx: T, v: &mut [T]);

    /// `(q_i⁺, q_i⁻)` as functions of the potential `v_i`.
    fn rates_at(&self, i: usize, v_i: T) -> (T, T);

    /// `(d q_i⁺/dv, d q_i⁻/dv)` at `v_i`.
    fn rate_slopes_at(&self, i: usize, v_i: T) -> (T, T);

    fn norm_constants(&self) -> NormConstants<T>;

    /// True when no rate depends on the state.
    fn is_state_independent(&self) -> bool {
        false
    }

    /// `v = S x + b`.
    fn potentials_into(&self, x: &[T], v: &mut [T], ws: &mut Workspace<T>) {
        self.weights_apply(x, v, ws);
        if let Some(b) = self.potential_offset() {
            for (vi, &bi) in v.iter_mut().zip(b) {
                *vi = *vi + bi;
            }
        }
    }

    fn potentials(&self, x: &[T], ws: &mut Workspace<T>) -> Result<Vec<T>> {
        check_len("state", x.len(), self.size())?;
        let mut v = vec![T::zero(); x.len()];
        self.potentials_into(x, &mut v, ws);
        Ok(v)
    }

    /// Fills `up` and `down` with `q⁺(x)` and `q⁻(x)`.
    fn rates_into(&self, x: &[T], up: &mut [T], down: &mut [T], ws: &mut Workspace<T>) {
        self.potentials_into(x, up, ws);
        for i in 0..up.len() {
            let (u, d) = self.rates_at(i, up[i]);
            up[i] = u;
            down[i] = d;
        }
    }

    fn rates_up(&self, x: &[T], ws: &mut Workspace<T>) -> Result<Vec<T>> {
        let mut v = self.potentials(x, ws)?;
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = self.rates_at(i, *vi).0;
        }
        Ok(v)
    }

    fn rates_down(&self, x: &[T], ws: &mut Workspace<T>) -> Result<Vec<T>> {
        let mut v = self.potentials(x, ws)?;
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = self.rates_at(i, *vi).1;
        }
        Ok(v)
    }

    /// `drift_i = (1 − x_i) q_i⁺(x) − x_i q_i⁻(x)`.
    fn drift_into(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        self.potentials_into(x, out, ws);
        for i in 0..out.len() {
            let (u, d) = self.rates_at(i, out[i]);
            out[i] = (T::one() - x[i]) * u - x[i] * d;
        }
    }

    fn drift(&self, x: &[T], ws: &mut Workspace<T>) -> Result<Vec<T>> {
        check_len("state", x.len(), self.size())?;
        let mut out = vec![T::zero(); x.len()];
        self.drift_into(x, &mut out, ws);
        Ok(out)
    }

    /// `(J w)_i = Σ_j ∂_j drift_i(x) w_j`; with `off_diagonal` the `j = i`
    /// kernel term of each rate is dropped (the `D*` restriction).
    fn jacobian_apply_into(&self, x: &[T], w: &[T], out: &mut [T], off_diagonal: bool, ws: &mut Workspace<T>) {
        let n = x.len();
        let mut v = vec![T::zero(); n];
        self.potentials_into(x, &mut v, ws);
        self.weights_apply(w, out, ws);
        for i in 0..n {
            let sw = out[i];
            let (u, d) = self.rates_at(i, v[i]);
            let (gu, gd) = self.rate_slopes_at(i, v[i]);
            let h = (T::one() - x[i]) * gu - x[i] * gd;
            let mut cross = sw;
            if off_diagonal {
                cross = cross - self.weight(i, i) * w[i];
            }
            out[i] = h * cross - if off_diagonal { T::zero() } else { (u + d) * w[i] };
        }
    }

    /// `(Jᵀ w)_i = Σ_j ∂_i drift_j(x) w_j`, with the same `off_diagonal`
    /// convention as [`RateModel::jacobian_apply_into`].
    fn jacobian_transpose_apply_into(
        &self,
        x: &[T],
        w: &[T],
        out: &mut [T],
        off_diagonal: bool,
        ws: &mut Workspace<T>,
    ) {
        let n = x.len();
        let mut v = vec![T::zero(); n];
        self.potentials_into(x, &mut v, ws);
        let mut hw = vec![T::zero(); n];
        for i in 0..n {
            let (gu, gd) = self.rate_slopes_at(i, v[i]);
            hw[i] = ((T::one() - x[i]) * gu - x[i] * gd) * w[i];
        }
        self.weights_transpose_apply(&hw, out, ws);
        for i in 0..n {
            if off_diagonal {
                out[i] = out[i] - self.weight(i, i) * hw[i];
            } else {
                let (u, d) = self.rates_at(i, v[i]);
                out[i] = out[i] - (u + d) * w[i];
            }
        }
    }

    fn jacobian_transpose_apply(&self, x: &[T], w: &[T], off_diagonal: bool, ws: &mut Workspace<T>) -> Result<Vec<T>> {
        check_len("state", x.len(), self.size())?;
        check_len("direction", w.len(), self.size())?;
        let mut out = vec![T::zero(); x.len()];
        self.jacobian_transpose_apply_into(x, w, &mut out, off_diagonal, ws);
        Ok(out)
    }

    fn jacobian_apply(&self, x: &[T], w: &[T], off_diagonal: bool, ws: &mut Workspace<T>) -> Result<Vec<T>> {
        check_len("state", x.len(), self.size())?;
        check_len("direction", w.len(), self.size())?;
        let mut out = vec![T::zero(); x.len()];
        self.jacobian_apply_into(x, w, &mut out, off_diagonal, ws);
        Ok(out)
    }
}

/// `q(η, i) = η_i q_i⁻(η) + (1 − η_i) q_i⁺(η)`.
pub fn rate_function<T: Scalar, M: RateModel<T> + ?Sized>(model: &M, eta: &SpinState, i: usize) -> Result<T> {
    check_len("state", eta.len(), model.size())?;
    if i >= eta.len() {
        return Err(Error::Domain(format!("site {i} out of range 0..{}", eta.len())));
    }
    let x: Vec<T> = eta.to_real();
    let v = model.potentials(&x, &mut model.new_workspace())?;
    let (up, down) = model.rates_at(i, v[i]);
    Ok(if eta.is_set(i) { down } else { up })
}

/// Shared implementation of a model with rates `f±_i((S x + b)_i)`.
#[derive(Debug, Clone)]
pub struct PotentialModel<T: Scalar> {
    op: PotentialOperator<T>,
    offset: Option<Vec<T>>,
    up: Link<T>,
    down: Link<T>,
    shape: [usize; 2],
    norms: NormConstants<T>,
}

impl<T: Scalar> PotentialModel<T> {
    pub fn new(
        op: PotentialOperator<T>,
        offset: Option<Vec<T>>,
        up: Link<T>,
        down: Link<T>,
        shape: [usize; 2],
        kind: NormKind,
    ) -> Result<Self> {
        up.validate()?;
        down.validate()?;
        let n = op.dim();
        if n == 0 {
            return Err(Error::config("model needs at least one site"));
        }
        check_len("lattice shape", shape[0] * shape[1], n)?;
        if let Some(b) = &offset {
            check_len("potential offset", b.len(), n)?;
        }
        let mut model = Self {
            op,
            offset,
            up,
            down,
            shape,
            norms: NormConstants::zero(),
        };
        model.norms = model.compute_norms(kind);
        Ok(model)
    }

    pub fn operator(&self) -> &PotentialOperator<T> {
        &self.op
    }

    pub fn links(&self) -> (Link<T>, Link<T>) {
        (self.up, self.down)
    }

    fn compute_norms(&self, kind: NormKind) -> NormConstants<T> {
        let st = self.op.stats();
        let n = self.op.dim();
        let slope = self.up.slope_bound().max(self.down.slope_bound());
        let curv = self.up.curvature_bound().max(self.down.curvature_bound());
        let zero = T::zero();
        let mut nc = NormConstants::<T>::zero();
        nc.kind = kind;
        for i in 0..n {
            let b = self.offset.as_ref().map_or(zero, |b| b[i]);
            let (lo, hi) = (b + st.neg_row[i], b + st.pos_row[i]);
            let su = self.up.sup_over(lo, hi);
            let sd = self.down.sup_over(lo, hi);
            nc.q_inf = nc.q_inf.max(su).max(sd);
            let col = slope * st.abs_col_off[i];
            nc.dstar_q_1 = nc.dstar_q_1.max(col);
            nc.d_q_1 = nc.d_q_1.max(col + su + sd + slope * st.diag[i].abs());
            nc.dstar_q_inf = nc.dstar_q_inf.max(slope * st.abs_row_off[i]);
            nc.dstar_q_21 = nc.dstar_q_21 + slope * st.sq_row_off[i].max(zero).sqrt();
            nc.gamma_n = nc.gamma_n + curv * st.sq_row_off[i].max(zero);
            nc.big_gamma_n = nc.big_gamma_n.max(curv * st.abs_row_off[i] * st.abs_row_off[i]);
        }
        nc
    }
}

impl<T: Scalar> RateModel<T> for PotentialModel<T> {
    fn size(&self) -> usize {
        self.op.dim()
    }

    fn shape(&self) -> [usize; 2] {
        self.shape
    }

    fn weights_apply(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        self.op.apply(x, out, ws);
    }

    fn potential_offset(&self) -> Option<&[T]> {
        self.offset.as_deref()
    }

    fn weights_transpose_apply(&self, y: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        self.op.apply_transpose(y, out, ws);
    }

    fn weight(&self, i: usize, j: usize) -> T {
        self.op.weight(i, j)
    }

    fn update_potentials(&self, j: usize, dx: T, v: &mut [T]) {
        self.op.add_column(j, dx, v);
    }

    #[inline]
    fn rates_at(&self, _i: usize, v_i: T) -> (T, T) {
        (self.up.eval(v_i), self.down.eval(v_i))
    }

    #[inline]
    fn rate_slopes_at(&self, _i: usize, v_i: T) -> (T, T) {
        (self.up.slope(v_i), self.down.slope(v_i))
    }

    fn norm_constants(&self) -> NormConstants<T> {
        self.norms
    }

    fn is_state_independent(&self) -> bool {
        let constant = |l: &Link<T>| matches!(l, Link::Constant(_));
        constant(&self.up) && constant(&self.down)
    }
}

/// Implements [`RateModel`] for a newtype wrapping a [`PotentialModel`] in
/// field `inner`.
macro_rules! delegate_rate_model {
    ($ty:ident) => {
        impl<T: Scalar> $crate::model::RateModel<T> for $ty<T> {
            fn size(&self) -> usize {
                self.inner.size()
            }
            fn shape(&self) -> [usize; 2] {
                self.inner.shape()
            }
            fn weights_apply(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>) {
                self.inner.weights_apply(x, out, ws)
            }
            fn potential_offset(&self) -> Option<&[T]> {
                self.inner.potential_offset()
            }
            fn weights_transpose_apply(&self, y: &[T], out: &mut [T], ws: &mut Workspace<T>) {
                self.inner.weights_transpose_apply(y, out, ws)
            }
            fn weight(&self, i: usize, j: usize) -> T {
                self.inner.weight(i, j)
            }
            fn update_potentials(&self, j: usize, dx: T, v: &mut [T]) {
                self.inner.update_potentials(j, dx, v)
            }
            #[inline]
            fn rates_at(&self, i: usize, v_i: T) -> (T, T) {
                self.inner.rates_at(i, v_i)
            }
            #[inline]
            fn rate_slopes_at(&self, i: usize, v_i: T) -> (T, T) {
                self.inner.rate_slopes_at(i, v_i)
            }
            fn norm_constants(&self) -> NormConstants<T> {
                self.inner.norm_constants()
            }
            fn is_state_independent(&self) -> bool {
                self.inner.is_state_independent()
            }
        }
    };
}
pub(crate) use delegate_rate_model;
