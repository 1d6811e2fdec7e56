use super::{delegate_rate_model, Link, NormConstants, NormKind, PotentialModel};
use crate::error::Result;
use crate::fastsum::{DenseMatrix, PotentialOperator, Workspace};
use crate::scalar::Scalar;

/// Rates `f±(Σ_j s_ij x_j)` for an arbitrary weight matrix.
///
/// Norm constants are upper bounds: each link is monotone, so its supremum on
/// `[0,1]^n` is attained at the corner maximizing or minimizing the potential,
/// and derivative suprema are bounded by global link derivative bounds.
#[derive(Debug, Clone)]
pub struct DenseModel<T: Scalar> {
    inner: PotentialModel<T>,
}

impl<T: Scalar> DenseModel<T> {
    pub fn new(weights: DenseMatrix<T>, up: Link<T>, down: Link<T>) -> Result<Self> {
        let n = weights.n();
        let inner = PotentialModel::new(
            PotentialOperator::Dense(weights),
            None,
            up,
            down,
            [1, n],
            NormKind::UpperBound,
        )?;
        Ok(Self { inner })
    }

    pub fn links(&self) -> (Link<T>, Link<T>) {
        self.inner.links()
    }
}

delegate_rate_model!(DenseModel);
