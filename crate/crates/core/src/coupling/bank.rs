use crate::rng::{Domain, StreamRng};
use crate::scalar::Scalar;

/// Direction of a flip: `Up` is 0→1, `Down` is 1→0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Up = 0,
    Down = 1,
}

const CHUNK: usize = 4;

/// Unit-rate Poisson arrival streams, one per `(site, direction)`.
///
/// Arrival `k` of a stream is the sum of the first `k+1` unit exponentials
/// drawn from word positions `0..=k` of its counter-based random stream, so
/// every arrival is a pure function of `(seed, site, direction, k)`. Values
/// are cached as they are generated; consumers keep their own cursors.
#[derive(Debug, Clone)]
pub struct PoissonStreamBank<T> {
    seed: u64,
    arrivals: Vec<Vec<T>>,
}

impl<T: Scalar> PoissonStreamBank<T> {
    pub fn new(seed: u64, sites: usize) -> Self {
        Self {
            seed,
            arrivals: vec![Vec::new(); 2 * sites],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sites(&self) -> usize {
        self.arrivals.len() / 2
    }

    /// The `k`-th arrival point of stream `(site, dir)`.
    pub fn arrival(&mut self, site: usize, dir: Dir, k: usize) -> T {
        let idx = 2 * site + dir as usize;
        let stream = &mut self.arrivals[idx];
        if k >= stream.len() {
            let pos = stream.len();
            let mut rng = StreamRng::at(self.seed, Domain::PoissonBank, idx as u64, pos as u64);
            let mut acc = stream.last().copied().unwrap_or(T::zero());
            let want = (k + 1).max(pos + CHUNK);
            for _ in pos..want {
                acc = acc + rng.exp1::<T>();
                stream.push(acc);
            }
        }
        stream[k]
    }

    /// Regenerates an arrival without touching the cache.
    pub fn regenerate(&self, site: usize, dir: Dir, k: usize) -> T {
        let idx = 2 * site + dir as usize;
        let mut rng = StreamRng::new(self.seed, Domain::PoissonBank, idx as u64);
        let mut acc = T::zero();
        for _ in 0..=k {
            acc = acc + rng.exp1::<T>();
        }
        acc
    }
}
