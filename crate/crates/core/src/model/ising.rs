use super::{delegate_rate_model, Link, NormConstants, NormKind, PotentialModel};
use crate::error::{Error, Result};
use crate::fastsum::{KernelSpec, LatticeConvolver, PotentialOperator, Taps, Workspace};
use crate::scalar::Scalar;

/// Glauber-type Ising model on an `m × m` grid in `[−1,1]²` with Gaussian Kac
/// interaction: `q_i^± = ½[1 ± tanh((β/n) Σ_j exp(−a‖z_i − z_j‖²)(2x_j − 1))]`.
#[derive(Debug, Clone)]
pub struct IsingKac2DModel<T: Scalar> {
    inner: PotentialModel<T>,
    side: usize,
    beta: T,
    a: T,
    periodic: bool,
}

impl<T: Scalar> IsingKac2DModel<T> {
    pub fn new(side: usize, beta: T, a: T, periodic: bool) -> Result<Self> {
        if side == 0 {
            return Err(Error::config("ising-kac-2d: side must be positive"));
        }
        if !beta.is_finite() || !(a >= T::zero() && a.is_finite()) {
            return Err(Error::config("ising-kac-2d: beta must be finite and a >= 0"));
        }
        let n = side * side;
        let nn = T::from_count(n);
        let h = if side > 1 {
            T::lit(2.0) / T::from_count(side - 1)
        } else {
            T::zero()
        };
        let spec = KernelSpec::two_d(
            side,
            side,
            Taps::Gaussian {
                precision: a,
                spacing: [h, h],
            },
            periodic,
            T::lit(2.0) * beta / nn,
        );
        let conv = LatticeConvolver::new(spec)?;
        // b = −½ S·1 turns S x + b into (β/n) Σ_j k_ij (2x_j − 1)
        let mut offset = vec![T::zero(); n];
        conv.apply(&vec![T::one(); n], &mut offset, &mut Workspace::new(), false);
        offset.iter_mut().for_each(|b| *b = -T::lit(0.5) * *b);
        let tanh = |sign: f64| Link::TanhIsing {
            sign: T::lit(sign),
            gain: T::one(),
            field: T::zero(),
        };
        let inner = PotentialModel::new(
            PotentialOperator::Lattice(conv),
            Some(offset),
            tanh(1.0),
            tanh(-1.0),
            [side, side],
            NormKind::UpperBound,
        )?;
        Ok(Self {
            inner,
            side,
            beta,
            a,
            periodic,
        })
    }

    /// Kernel precision given as `a = a_scale / n`.
    pub fn with_a_scale(side: usize, beta: T, a_scale: T, periodic: bool) -> Result<Self> {
        Self::new(side, beta, a_scale / T::from_count(side * side), periodic)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }
}

delegate_rate_model!(IsingKac2DModel);
