use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{OperatorStats, Workspace};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Kernel values `k(i − j)` indexed by lattice offset.
#[derive(Debug, Clone, PartialEq)]
pub enum Taps<T> {
    /// Explicit table. Non-periodic kernels use a `(2R−1) × (2C−1)` row-major
    /// table where offset `(dr, dc)` lives at `(dr+R−1, dc+C−1)`; periodic
    /// kernels use an `R × C` table indexed by `(dr mod R, dc mod C)`.
    Explicit(Vec<T>),
    /// `exp(−precision · ((dr·spacing[0])² + (dc·spacing[1])²))`, evaluated at
    /// every offset of the lattice (minimum-image offsets when periodic).
    Gaussian { precision: T, spacing: [T; 2] },
}

/// A translation-invariant kernel on a 1-D or 2-D regular lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec<T> {
    /// Lattice extents `[rows, cols]`; a 1-D lattice has `rows == 1`.
    pub shape: [usize; 2],
    pub taps: Taps<T>,
    /// Circular convolution when true, exact zero-padded linear convolution
    /// otherwise.
    pub periodic: bool,
    /// Multiplier applied after summation.
    pub normalization: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn one_d(n: usize, taps: Taps<T>, periodic: bool, normalization: T) -> Self {
        Self {
            shape: [1, n],
            taps,
            periodic,
            normalization,
        }
    }

    pub fn two_d(rows: usize, cols: usize, taps: Taps<T>, periodic: bool, normalization: T) -> Self {
        Self {
            shape: [rows, cols],
            taps,
            periodic,
            normalization,
        }
    }

    pub fn dims(&self) -> usize {
        if self.shape[0] == 1 {
            1
        } else {
            2
        }
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn table_extent(&self) -> [usize; 2] {
        let [r, c] = self.shape;
        if self.periodic {
            [r, c]
        } else {
            [2 * r - 1, 2 * c - 1]
        }
    }

    /// Materializes the offset table (normalization not applied).
    fn offset_table(&self) -> Result<Vec<T>> {
        let [r, c] = self.shape;
        let [tr, tc] = self.table_extent();
        match &self.taps {
            Taps::Explicit(v) => {
                check_len("kernel tap table", v.len(), tr * tc)?;
                Ok(v.clone())
            }
            Taps::Gaussian { precision, spacing } => {
                let offset = |k: usize, extent: usize| -> T {
                    if self.periodic {
                        T::from_count(k.min(extent - k))
                    } else {
                        T::from_count(k.abs_diff(extent - 1))
                    }
                };
                let mut out = Vec::with_capacity(tr * tc);
                for a in 0..tr {
                    let dr = offset(a, r) * spacing[0];
                    for b in 0..tc {
                        let dc = offset(b, c) * spacing[1];
                        out.push((-*precision * (dr * dr + dc * dc)).exp());
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Smallest `2^a 3^b 5^c ≥ m`.
fn fast_size(m: usize) -> usize {
    let mut best = m.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut p = p35;
            while p < m {
                p *= 2;
            }
            best = best.min(p);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

/// FFT evaluator of `v_i = normalization · Σ_j k(i − j) x_j`.
///
/// The kernel spectrum and FFT plans are computed once at construction;
/// every call reuses them together with the caller's [`Workspace`].
#[derive(Clone)]
pub struct LatticeConvolver<T: Scalar> {
    spec: KernelSpec<T>,
    padded: [usize; 2],
    /// Offset table with the normalization folded in.
    table: Vec<T>,
    /// Kernel spectrum scaled by `1 / (PR · PC)`.
    spectrum: Vec<Complex<T>>,
    fwd: [Arc<dyn Fft<T>>; 2],
    inv: [Arc<dyn Fft<T>>; 2],
    scratch_len: usize,
}

impl<T: Scalar> fmt::Debug for LatticeConvolver<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeConvolver")
            .field("shape", &self.spec.shape)
            .field("periodic", &self.spec.periodic)
            .field("padded", &self.padded)
            .finish()
    }
}

impl<T: Scalar> LatticeConvolver<T> {
    pub fn new(spec: KernelSpec<T>) -> Result<Self> {
        let [r, c] = spec.shape;
        if r == 0 || c == 0 {
            return Err(Error::config("lattice extents must be positive"));
        }
        if !spec.normalization.is_finite() {
            return Err(Error::config("kernel normalization must be finite"));
        }
        let raw = spec.offset_table()?;
        if raw.iter().any(|t| !t.is_finite()) {
            return Err(Error::config("kernel taps must be finite"));
        }
        let table: Vec<T> = raw.iter().map(|&t| t * spec.normalization).collect();
        let padded = if spec.periodic {
            [r, c]
        } else {
            [
                if r == 1 { 1 } else { fast_size(2 * r - 1) },
                if c == 1 { 1 } else { fast_size(2 * c - 1) },
            ]
        };
        let mut planner = FftPlanner::<T>::new();
        let fwd = [planner.plan_fft_forward(padded[0]), planner.plan_fft_forward(padded[1])];
        let inv = [planner.plan_fft_inverse(padded[0]), planner.plan_fft_inverse(padded[1])];
        let scratch_len = fwd
            .iter()
            .chain(inv.iter())
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let mut conv = Self {
            spec,
            padded,
            table,
            spectrum: Vec::new(),
            fwd,
            inv,
            scratch_len,
        };
        conv.spectrum = conv.compute_spectrum();
        Ok(conv)
    }

    fn compute_spectrum(&self) -> Vec<Complex<T>> {
        let [r, c] = self.spec.shape;
        let [pr, pc] = self.padded;
        let mut ws = Workspace::new();
        ws.buf = vec![Complex::new(T::zero(), T::zero()); pr * pc];
        if self.spec.periodic {
            ws.buf.iter_mut().zip(&self.table).for_each(|(b, &t)| b.re = t);
        } else {
            let tc = 2 * c - 1;
            for a in 0..(2 * r - 1) {
                let dr = a as isize - (r as isize - 1);
                let row = dr.rem_euclid(pr as isize) as usize;
                for b in 0..tc {
                    let dc = b as isize - (c as isize - 1);
                    let col = dc.rem_euclid(pc as isize) as usize;
                    ws.buf[row * pc + col].re = self.table[a * tc + b];
                }
            }
        }
        self.fft2(&mut ws, true);
        let scale = T::one() / T::from_count(pr * pc);
        ws.buf.iter().map(|z| z * scale).collect()
    }

    pub fn spec(&self) -> &KernelSpec<T> {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    fn fft2(&self, ws: &mut Workspace<T>, forward: bool) {
        let [pr, pc] = self.padded;
        let plans = if forward { &self.fwd } else { &self.inv };
        if ws.scratch.len() < self.scratch_len {
            ws.scratch.resize(self.scratch_len, Complex::new(T::zero(), T::zero()));
        }
        let scratch = &mut ws.scratch[..self.scratch_len];
        if pc > 1 {
            plans[1].process_with_scratch(&mut ws.buf, scratch);
        }
        if pr > 1 {
            ws.tmp.resize(pr * pc, Complex::new(T::zero(), T::zero()));
            transpose(&ws.buf, &mut ws.tmp, pr, pc);
            plans[0].process_with_scratch(&mut ws.tmp, scratch);
            transpose(&ws.tmp, &mut ws.buf, pc, pr);
        }
    }

    /// `out = S x` (or `Sᵀ x` when `transpose`), with `x`, `out` in
    /// row-major lattice order.
    pub fn apply(&self, x: &[T], out: &mut [T], ws: &mut Workspace<T>, transpose: bool) {
        let [r, c] = self.spec.shape;
        let [pr, pc] = self.padded;
        debug_assert_eq!(x.len(), r * c);
        debug_assert_eq!(out.len(), r * c);
        ws.buf.clear();
        ws.buf.resize(pr * pc, Complex::new(T::zero(), T::zero()));
        for (row, xs) in x.chunks_exact(c).enumerate() {
            for (b, &v) in ws.buf[row * pc..row * pc + c].iter_mut().zip(xs) {
                b.re = v;
            }
        }
        self.fft2(ws, true);
        if transpose {
            ws.buf
                .iter_mut()
                .zip(&self.spectrum)
                .for_each(|(b, s)| *b = *b * s.conj());
        } else {
            ws.buf.iter_mut().zip(&self.spectrum).for_each(|(b, s)| *b = *b * s);
        }
        self.fft2(ws, false);
        for (row, os) in out.chunks_exact_mut(c).enumerate() {
            for (o, b) in os.iter_mut().zip(&ws.buf[row * pc..row * pc + c]) {
                *o = b.re;
            }
        }
    }

    #[inline]
    fn table_index(&self, dr: isize, dc: isize) -> usize {
        let [r, c] = self.spec.shape;
        if self.spec.periodic {
            dr.rem_euclid(r as isize) as usize * c + dc.rem_euclid(c as isize) as usize
        } else {
            (dr + r as isize - 1) as usize * (2 * c - 1) + (dc + c as isize - 1) as usize
        }
    }

    /// `s_ij` including the normalization.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        let c = self.spec.shape[1];
        let dr = (i / c) as isize - (j / c) as isize;
        let dc = (i % c) as isize - (j % c) as isize;
        self.table[self.table_index(dr, dc)]
    }

    /// `v += scale · S[:, j]` in `O(n)`.
    pub fn add_column(&self, j: usize, scale: T, v: &mut [T]) {
        let [r, c] = self.spec.shape;
        let (rj, cj) = ((j / c) as isize, (j % c) as isize);
        for (ri, vs) in v.chunks_exact_mut(c).enumerate().take(r) {
            let dr = ri as isize - rj;
            if self.spec.periodic {
                let base = dr.rem_euclid(r as isize) as usize * c;
                let row = &self.table[base..base + c];
                for (ci, vi) in vs.iter_mut().enumerate() {
                    let dc = (ci + c - cj as usize) % c;
                    *vi = *vi + scale * row[dc];
                }
            } else {
                let start = self.table_index(dr, -cj);
                let row = &self.table[start..start + c];
                for (vi, &s) in vs.iter_mut().zip(row) {
                    *vi = *vi + scale * s;
                }
            }
        }
    }

    /// Row and column summaries computed by convolving transformed tap
    /// tables against the all-ones vector.
    pub fn stats(&self) -> OperatorStats<T> {
        let n = self.len();
        let derived = |f: &dyn Fn(T) -> T| -> LatticeConvolver<T> {
            let spec = KernelSpec {
                shape: self.spec.shape,
                taps: Taps::Explicit(self.table.iter().map(|&t| f(t)).collect()),
                periodic: self.spec.periodic,
                normalization: T::one(),
            };
            LatticeConvolver::new(spec).expect("derived kernel is valid")
        };
        let pos = derived(&|t| t.max(T::zero()));
        let neg = derived(&|t| t.min(T::zero()));
        let sq = derived(&|t| t * t);
        let ones = vec![T::one(); n];
        let mut ws = Workspace::new();
        let run = |conv: &LatticeConvolver<T>, transpose: bool, ws: &mut Workspace<T>| {
            let mut out = vec![T::zero(); n];
            conv.apply(&ones, &mut out, ws, transpose);
            out
        };
        let pos_row: Vec<T> = run(&pos, false, &mut ws)
            .into_iter()
            .map(|v| v.max(T::zero()))
            .collect();
        let neg_row: Vec<T> = run(&neg, false, &mut ws)
            .into_iter()
            .map(|v| v.min(T::zero()))
            .collect();
        let pos_col = run(&pos, true, &mut ws);
        let neg_col = run(&neg, true, &mut ws);
        let sq_row = run(&sq, false, &mut ws);
        let d = self.table[self.table_index(0, 0)];
        let nonneg = |v: T| v.max(T::zero());
        OperatorStats {
            abs_row_off: pos_row
                .iter()
                .zip(&neg_row)
                .map(|(&p, &q)| nonneg(p - q - d.abs()))
                .collect(),
            abs_col_off: pos_col
                .iter()
                .zip(&neg_col)
                .map(|(&p, &q)| nonneg(p - q - d.abs()))
                .collect(),
            sq_row_off: sq_row.into_iter().map(|v| nonneg(v - d * d)).collect(),
            diag: vec![d; n],
            pos_row,
            neg_row,
        }
    }
}

fn transpose<T: Copy>(src: &[T], dst: &mut [T], rows: usize, cols: usize) {
    const BLOCK: usize = 32;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// One-shot convenience wrapper: builds the convolver and applies it.
pub fn convolve_fft<T: Scalar>(kernel: &KernelSpec<T>, x: &[T]) -> Result<Vec<T>> {
    check_len("input vector", x.len(), kernel.len())?;
    let conv = LatticeConvolver::new(kernel.clone())?;
    let mut out = vec![T::zero(); x.len()];
    conv.apply(x, &mut out, &mut Workspace::new(), false);
    Ok(out)
}
