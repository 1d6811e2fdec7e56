use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A configuration `η ∈ {0,1}^n`. Entries are stored as bytes that are always
/// exactly 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinState {
    bits: Vec<u8>,
}

impl SpinState {
    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { bits: vec![1; n] }
    }

    /// Builds a state from raw bytes, rejecting anything other than 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Domain(format!(
                "spin entry {pos} is {}, expected 0 or 1",
                bits[pos]
            )));
        }
        Ok(Self { bits })
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self {
            bits: bits.into_iter().map(u8::from).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    #[inline]
    pub fn is_set(&self, i: usize) -> bool {
        self.bits[i] == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = u8::from(value);
    }

    /// Flips site `i` and returns its new value.
    #[inline]
    pub fn flip(&mut self, i: usize) -> u8 {
        self.bits[i] ^= 1;
        self.bits[i]
    }

    pub fn as_bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Fraction of occupied sites.
    pub fn occupancy<T: Scalar>(&self) -> T {
        if self.bits.is_empty() {
            return T::zero();
        }
        T::from_count(self.count_ones()) / T::from_count(self.bits.len())
    }

    /// Embeds the state into `[0,1]^n`.
    pub fn to_real<T: Scalar>(&self) -> Vec<T> {
        self.bits
            .iter()
            .map(|&b| if b == 1 { T::one() } else { T::zero() })
            .collect()
    }

    pub fn write_real<T: Scalar>(&self, out: &mut [T]) {
        for (o, &b) in out.iter_mut().zip(&self.bits) {
            *o = if b == 1 { T::one() } else { T::zero() };
        }
    }

    /// Number of sites at which the two states disagree.
    pub fn hamming(&self, other: &SpinState) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}
