//! Evaluation of the potentials `v_i = Σ_j s_ij x_j`.
//!
//! Three strategies are provided: an exact FFT convolution for translation
//! invariant lattice kernels ([`LatticeConvolver`]), a monopole Barnes–Hut
//! tree for scattered sites ([`sum_tree`]) and the quadratic dense sum
//! ([`sum_dense`]) that serves as the reference for both.

mod fft;
mod tree;

pub use fft::{convolve_fft, KernelSpec, LatticeConvolver, Taps};
pub use tree::{sum_tree, TreeConfig};

use rustfft::num_complex::Complex;

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Scratch buffers for one caller of the FFT path. Workspaces are cheap to
/// create and must not be shared between concurrent calls; clone the model
/// and create one workspace per worker instead.
#[derive(Debug, Default, Clone)]
pub struct Workspace<T: Scalar> {
    pub(crate) buf: Vec<Complex<T>>,
    pub(crate) tmp: Vec<Complex<T>>,
    pub(crate) scratch: Vec<Complex<T>>,
}

impl<T: Scalar> Workspace<T> {
    pub fn new() -> Self {
        Self {
            buf: Vec::new(),
            tmp: Vec::new(),
            scratch: Vec::new(),
        }
    }
}

/// Exact double-loop evaluation of `v = S x` for a row-major `n × n` matrix.
pub fn sum_dense<T: Scalar>(weights: &[T], x: &[T]) -> Result<Vec<T>> {
    let n = x.len();
    check_len("weight matrix", weights.len(), n * n)?;
    Ok(weights
        .chunks_exact(n.max(1))
        .take(n)
        .map(|row| row.iter().zip(x).fold(T::zero(), |acc, (&s, &xj)| acc + s * xj))
        .collect())
}

/// Row-major dense weight matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix<T: Scalar> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(n: usize, data: Vec<T>) -> Result<Self> {
        check_len("weight matrix", data.len(), n * n)?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("weight matrix contains non-finite entries"));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }
}

/// Per-row and per-column summaries of a weight matrix that feed the
/// regularity constants of a model.
#[derive(Debug, Clone)]
pub struct OperatorStats<T> {
    /// `Σ_j max(s_ij, 0)` per row.
    pub pos_row: Vec<T>,
    /// `Σ_j min(s_ij, 0)` per row.
    pub neg_row: Vec<T>,
    /// `Σ_{j≠i} |s_ij|` per row.
    pub abs_row_off: Vec<T>,
    /// `Σ_{j≠i} s_ij²` per row.
    pub sq_row_off: Vec<T>,
    /// `Σ_{i≠j} |s_ij|` per column.
    pub abs_col_off: Vec<T>,
    /// `s_ii`.
    pub diag: Vec<T>,
}

/// The linear map `x ↦ S x` behind a potential-form model.
#[derive(Debug, Clone)]
pub enum PotentialOperator<T: Scalar> {
    Lattice(LatticeConvolver<T>),
    Dense(DenseMatrix<T>),
}

impl<T: Scalar> PotentialOperator<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Lattice(c) => c.len(),
            Self::Dense(d) => d.n,
        }
    }

    /// `out = S x`.
    pub fn apply(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        match self {
            Self::Lattice(c) => c.apply(x, out, ws, false),
            Self::Dense(d) => {
                for (o, row) in out.iter_mut().zip(d.data.chunks_exact(d.n)) {
                    *o = row.iter().zip(x).fold(T::zero(), |a, (&s, &xj)| a + s * xj);
                }
            }
        }
    }

    /// `out = Sᵀ y`.
    pub fn apply_transpose(&self, y: &[T], out: &mut [T], ws: &mut Workspace<T>) {
        match self {
            Self::Lattice(c) => c.apply(y, out, ws, true),
            Self::Dense(d) => {
                out.iter_mut().for_each(|o| *o = T::zero());
                for (row, &yi) in d.data.chunks_exact(d.n).zip(y) {
                    if yi == T::zero() {
                        continue;
                    }
                    for (o, &s) in out.iter_mut().zip(row) {
                        *o = *o + s * yi;
                    }
                }
            }
        }
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        match self {
            Self::Lattice(c) => c.weight(i, j),
            Self::Dense(d) => d.get(i, j),
        }
    }

    /// `v += scale · S[:, j]`, the potential update after site `j` changes
    /// by `scale`.
    pub fn add_column(&self, j: usize, scale: T, v: &mut [T]) {
        match self {
            Self::Lattice(c) => c.add_column(j, scale, v),
            Self::Dense(d) => {
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi = *vi + scale * d.data[i * d.n + j];
                }
            }
        }
    }

    pub fn stats(&self) -> OperatorStats<T> {
        match self {
            Self::Lattice(c) => c.stats(),
            Self::Dense(d) => {
                let n = d.n;
                let z = vec![T::zero(); n];
                let mut st = OperatorStats {
                    pos_row: z.clone(),
                    neg_row: z.clone(),
                    abs_row_off: z.clone(),
                    sq_row_off: z.clone(),
                    abs_col_off: z.clone(),
                    diag: z,
                };
                for i in 0..n {
                    for j in 0..n {
                        let s = d.get(i, j);
                        if s > T::zero() {
                            st.pos_row[i] = st.pos_row[i] + s;
                        } else {
                            st.neg_row[i] = st.neg_row[i] + s;
                        }
                        if i == j {
                            st.diag[i] = s;
                        } else {
                            st.abs_row_off[i] = st.abs_row_off[i] + s.abs();
                            st.sq_row_off[i] = st.sq_row_off[i] + s * s;
                            st.abs_col_off[j] = st.abs_col_off[j] + s.abs();
                        }
                    }
                }
                st
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Domain, StreamRng};

    fn random_vec(seed: u64, n: usize) -> Vec<f64> {
        let mut r = StreamRng::new(seed, Domain::Init, 0);
        (0..n).map(|_| 2.0 * r.uniform_open() - 1.0).collect()
    }

    #[test]
    fn dense_identity_and_zero() {
        let n = 5;
        let x = random_vec(1, n);
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = 1.0;
        }
        assert_eq!(sum_dense(&eye, &x).unwrap(), x);
        assert_eq!(sum_dense(&vec![0.0; n * n], &x).unwrap(), vec![0.0; n]);
    }

    #[test]
    fn dense_matches_column_major_accumulation() {
        let n = 8;
        let w = random_vec(2, n * n);
        let x = random_vec(3, n);
        let v = sum_dense(&w, &x).unwrap();
        // reordered oracle: accumulate column by column, last column first
        let mut oracle = vec![0.0; n];
        for j in (0..n).rev() {
            for i in 0..n {
                oracle[i] += w[i * n + j] * x[j];
            }
        }
        for i in 0..n {
            assert!((v[i] - oracle[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_length_mismatch_is_config_error() {
        assert!(matches!(
            sum_dense(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn dense_operator_transpose_and_column_update() {
        let n = 6;
        let w = random_vec(4, n * n);
        let op = PotentialOperator::Dense(DenseMatrix::new(n, w.clone()).unwrap());
        let mut ws = Workspace::new();
        let x = random_vec(5, n);
        let mut out = vec![0.0; n];
        op.apply_transpose(&x, &mut out, &mut ws);
        for j in 0..n {
            let want: f64 = (0..n).map(|i| w[i * n + j] * x[i]).sum();
            assert!((out[j] - want).abs() < 1e-12);
        }
        let mut v = vec![0.0; n];
        op.apply(&x, &mut v, &mut ws);
        op.add_column(2, 0.5, &mut v);
        let mut x2 = x.clone();
        x2[2] += 0.5;
        let mut v2 = vec![0.0; n];
        op.apply(&x2, &mut v2, &mut ws);
        for i in 0..n {
            assert!((v[i] - v2[i]).abs() < 1e-12);
        }
    }
}
