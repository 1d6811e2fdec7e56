#![allow(dead_code)]

use spinsim_core::fastsum::{DenseMatrix, KernelSpec, LatticeConvolver, PotentialOperator, Taps};
use spinsim_core::model::{DenseModel, Link, NormKind, PotentialModel};

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm = a
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scale = 2f64.powi(s);
    let a: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v / scale).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..30 {
        term = matmul(&term, &a);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = matmul(&result, &result);
    }
    result
}

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Probability of state 1 after `delta` for the two-state generator.
pub fn two_state_oracle(up: f64, down: f64, start: bool, delta: f64) -> f64 {
    let g = vec![vec![-up * delta, up * delta], vec![down * delta, -down * delta]];
    let p = expm(&g);
    p[usize::from(start)][1]
}

/// Sites with constant rates and no interaction.
pub fn constant_model(n: usize, up: f64, down: f64) -> PotentialModel<f64> {
    let zero = KernelSpec::one_d(n, Taps::Explicit(vec![0.0; 2 * n - 1]), false, 1.0);
    PotentialModel::new(
        PotentialOperator::Lattice(LatticeConvolver::new(zero).unwrap()),
        None,
        Link::Constant(up),
        Link::Constant(down),
        [1, n],
        NormKind::Exact,
    )
    .unwrap()
}

/// Mean-field model with `q⁺ = 2·mean(x)` and `q⁻ = 1`.
pub fn mean_field_model(n: usize) -> DenseModel<f64> {
    DenseModel::new(
        DenseMatrix::new(n, vec![2.0 / n as f64; n * n]).unwrap(),
        Link::linear(1.0),
        Link::Constant(1.0),
    )
    .unwrap()
}

/// Deterministic pseudo-random numbers in (0, 1) for test inputs.
pub fn uniforms(seed: u64, len: usize) -> Vec<f64> {
    let mut r = spinsim_core::rng::StreamRng::new(seed, spinsim_core::rng::Domain::Init, 99);
    (0..len).map(|_| r.uniform_open()).collect()
}

/// Chi-square statistic of observed counts against probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * total as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}
