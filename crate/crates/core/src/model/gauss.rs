use super::{delegate_rate_model, Link, NormConstants, NormKind, PotentialModel};
use crate::error::{Error, Result};
use crate::fastsum::{KernelSpec, LatticeConvolver, PotentialOperator, Taps, Workspace};
use crate::scalar::Scalar;

/// Contact-type process on a 1-D chain: sites become occupied at rate
/// `(2σ)/(n√π) Σ_j exp(−(σ(i−j)/n)²) x_j` and vacate at constant rate `μ`.
#[derive(Debug, Clone)]
pub struct GaussConv1DModel<T: Scalar> {
    inner: PotentialModel<T>,
    sigma: T,
    death_rate: T,
    periodic: bool,
}

impl<T: Scalar> GaussConv1DModel<T> {
    /// Zero-padded (edge-truncated) kernel.
    pub fn new(n: usize, sigma: T, death_rate: T) -> Result<Self> {
        Self::with_boundary(n, sigma, death_rate, false)
    }

    pub fn with_boundary(n: usize, sigma: T, death_rate: T, periodic: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("gauss-conv-1d: n must be positive"));
        }
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::config("gauss-conv-1d: sigma must be positive"));
        }
        let nn = T::from_count(n);
        let scale = T::lit(2.0) * sigma / (nn * T::PI().sqrt());
        let width = sigma / nn;
        let spec = KernelSpec::one_d(
            n,
            Taps::Gaussian {
                precision: width * width,
                spacing: [T::one(), T::one()],
            },
            periodic,
            scale,
        );
        let op = PotentialOperator::Lattice(LatticeConvolver::new(spec)?);
        let inner = PotentialModel::new(
            op,
            None,
            Link::linear(T::one()),
            Link::Constant(death_rate),
            [1, n],
            NormKind::Exact,
        )
        .map_err(|e| match e {
            Error::Config(m) => Error::config(format!("gauss-conv-1d: {m}")),
            other => other,
        })?;
        Ok(Self {
            inner,
            sigma,
            death_rate,
            periodic,
        })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn death_rate(&self) -> T {
        self.death_rate
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }
}

delegate_rate_model!(GaussConv1DModel);
