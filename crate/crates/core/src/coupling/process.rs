use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::bank::{Dir, PoissonStreamBank};
use crate::error::{Error, Result};
use crate::fastsum::Workspace;
use crate::model::RateModel;
use crate::scalar::Scalar;
use crate::simulate::{frozen_rates, GridScheme};
use crate::state::SpinState;

/// Random time change bookkeeping: per stream the integrated intensity and
/// the cursor of the next unconsumed arrival; per site the active rate, the
/// time the active integral was last brought up to date and the resulting
/// candidate event time.
#[derive(Debug, Clone)]
struct Clocks<T> {
    integ: Vec<T>,
    cursor: Vec<usize>,
    rate: Vec<T>,
    last: Vec<T>,
    next: Vec<T>,
}

fn active(eta: &SpinState, i: usize) -> Dir {
    if eta.is_set(i) {
        Dir::Down
    } else {
        Dir::Up
    }
}

impl<T: Scalar> Clocks<T> {
    fn new(n: usize) -> Self {
        Self {
            integ: vec![T::zero(); 2 * n],
            cursor: vec![0; 2 * n],
            rate: vec![T::zero(); n],
            last: vec![T::zero(); n],
            next: vec![T::infinity(); n],
        }
    }

    fn schedule(&mut self, i: usize, dir: Dir, bank: &mut PoissonStreamBank<T>) {
        let s = 2 * i + dir as usize;
        self.next[i] = if self.rate[i] > T::zero() {
            let target = bank.arrival(i, dir, self.cursor[s]);
            self.last[i] + (target - self.integ[s]).max(T::zero()) / self.rate[i]
        } else {
            T::infinity()
        };
    }

    /// Changes the active rate of site `i` at time `t`; a bitwise-identical
    /// rate leaves the clock untouched. Returns whether anything changed.
    fn set_rate(&mut self, i: usize, dir: Dir, rate: T, t: T, bank: &mut PoissonStreamBank<T>) -> Result<bool> {
        if !(rate >= T::zero() && rate.is_finite()) {
            return Err(Error::Model(format!("site {i} has invalid intensity {rate}")));
        }
        if rate.to_bits_eq(self.rate[i]) {
            return Ok(false);
        }
        let s = 2 * i + dir as usize;
        self.integ[s] = self.integ[s] + self.rate[i] * (t - self.last[i]);
        self.last[i] = t;
        self.rate[i] = rate;
        self.schedule(i, dir, bank);
        Ok(true)
    }

    /// Consumes the pending arrival of the active stream of site `i` at time
    /// `t`; the opposite stream becomes active with intensity `rate`.
    fn fire(&mut self, i: usize, dir: Dir, t: T, rate: T, bank: &mut PoissonStreamBank<T>) -> Result<()> {
        let s = 2 * i + dir as usize;
        self.integ[s] = bank.arrival(i, dir, self.cursor[s]);
        self.cursor[s] += 1;
        if !(rate >= T::zero() && rate.is_finite()) {
            return Err(Error::Model(format!("site {i} has invalid intensity {rate}")));
        }
        self.last[i] = t;
        self.rate[i] = rate;
        let other = if dir == Dir::Up { Dir::Down } else { Dir::Up };
        self.schedule(i, other, bank);
        Ok(())
    }
}

trait BitsEq {
    fn to_bits_eq(self, other: Self) -> bool;
}

impl<T: Scalar> BitsEq for T {
    #[inline]
    fn to_bits_eq(self, other: Self) -> bool {
        self.as_f64().to_bits() == other.as_f64().to_bits()
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry<T> {
    t: T,
    site: usize,
}

impl<T: Scalar> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Entry<T> {}

impl<T: Scalar> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Entry<T> {
    // reversed so that BinaryHeap pops the earliest (time, site)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .t
            .as_f64()
            .total_cmp(&self.t.as_f64())
            .then_with(|| other.site.cmp(&self.site))
    }
}

/// What a process does next.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Pending {
    Flip(usize),
    Boundary,
    Idle,
}

/// How a coupled process chooses its intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme<T> {
    /// Intensities follow the current state.
    Exact,
    /// Intensities frozen on each `[kδ, (k+1)δ)`.
    Grid { scheme: GridScheme, delta: T },
}

/// One process driven by the shared streams.
pub(crate) struct Process<'m, T: Scalar, M: RateModel<T> + ?Sized> {
    model: &'m M,
    pub(crate) scheme: Scheme<T>,
    pub(crate) eta: SpinState,
    clocks: Clocks<T>,
    v: Vec<T>,
    up: Vec<T>,
    down: Vec<T>,
    scratch: Vec<T>,
    ws: Workspace<T>,
    heap: BinaryHeap<Entry<T>>,
    step: usize,
    pub(crate) events: u64,
}

impl<'m, T: Scalar, M: RateModel<T> + ?Sized> Process<'m, T, M> {
    pub(crate) fn new(
        model: &'m M,
        scheme: Scheme<T>,
        eta: SpinState,
        bank: &mut PoissonStreamBank<T>,
    ) -> Result<Self> {
        let n = model.size();
        if let Scheme::Grid { scheme, delta } = scheme {
            if !(delta > T::zero() && delta.is_finite()) {
                return Err(Error::config(format!("delta must be positive, got {delta}")));
            }
            scheme.check_delta(model, delta)?;
        }
        let mut p = Self {
            model,
            scheme,
            eta,
            clocks: Clocks::new(n),
            v: vec![T::zero(); n],
            up: vec![T::zero(); n],
            down: vec![T::zero(); n],
            scratch: vec![T::zero(); n],
            ws: model.new_workspace(),
            heap: BinaryHeap::new(),
            step: 0,
            events: 0,
        };
        match scheme {
            Scheme::Exact => {
                p.eta.write_real(&mut p.scratch);
                model.potentials_into(&p.scratch, &mut p.v, &mut p.ws);
                p.refresh_exact(T::zero(), bank)?;
            }
            Scheme::Grid { .. } => p.refresh_grid(T::zero(), bank)?,
        }
        Ok(p)
    }

    fn refresh_exact(&mut self, t: T, bank: &mut PoissonStreamBank<T>) -> Result<()> {
        for i in 0..self.v.len() {
            let (u, d) = self.model.rates_at(i, self.v[i]);
            let dir = active(&self.eta, i);
            let r = if dir == Dir::Up { u } else { d };
            self.clocks.set_rate(i, dir, r, t, bank)?;
        }
        Ok(())
    }

    fn refresh_grid(&mut self, t: T, bank: &mut PoissonStreamBank<T>) -> Result<()> {
        let Scheme::Grid { scheme, delta } = self.scheme else {
            unreachable!()
        };
        frozen_rates(
            self.model,
            scheme,
            &self.eta,
            delta,
            &mut self.up,
            &mut self.down,
            &mut self.scratch,
            &mut self.ws,
        )?;
        self.heap.clear();
        for i in 0..self.up.len() {
            let dir = active(&self.eta, i);
            let r = if dir == Dir::Up { self.up[i] } else { self.down[i] };
            self.clocks.set_rate(i, dir, r, t, bank)?;
            if self.clocks.next[i].is_finite() {
                self.heap.push(Entry {
                    t: self.clocks.next[i],
                    site: i,
                });
            }
        }
        Ok(())
    }

    fn boundary_time(&self) -> Option<T> {
        match self.scheme {
            Scheme::Exact => None,
            Scheme::Grid { delta, .. } => Some(T::from_count(self.step + 1) * delta),
        }
    }

    /// Earliest pending action and its time.
    pub(crate) fn peek(&mut self) -> (T, Pending) {
        let flip = match self.scheme {
            Scheme::Exact => {
                let mut best = (T::infinity(), usize::MAX);
                for (i, &t) in self.clocks.next.iter().enumerate() {
                    if t < best.0 {
                        best = (t, i);
                    }
                }
                best
            }
            Scheme::Grid { .. } => {
                while let Some(top) = self.heap.peek() {
                    if top.t.to_bits_eq(self.clocks.next[top.site]) {
                        break;
                    }
                    self.heap.pop();
                }
                self.heap.peek().map_or((T::infinity(), usize::MAX), |e| (e.t, e.site))
            }
        };
        match self.boundary_time() {
            Some(b) if b <= flip.0 => (b, Pending::Boundary),
            _ if flip.1 != usize::MAX => (flip.0, Pending::Flip(flip.1)),
            _ => (T::infinity(), Pending::Idle),
        }
    }

    /// Performs `action` at time `t`; returns the flipped site, if any.
    pub(crate) fn advance(&mut self, t: T, action: Pending, bank: &mut PoissonStreamBank<T>) -> Result<Option<usize>> {
        match action {
            Pending::Idle => Ok(None),
            Pending::Boundary => {
                self.step += 1;
                self.refresh_grid(t, bank)?;
                Ok(None)
            }
            Pending::Flip(i) => {
                let dir = active(&self.eta, i);
                let now_set = self.eta.flip(i) == 1;
                self.events += 1;
                match self.scheme {
                    Scheme::Exact => {
                        let dx = if now_set { T::one() } else { -T::one() };
                        self.model.update_potentials(i, dx, &mut self.v);
                        let (u, d) = self.model.rates_at(i, self.v[i]);
                        self.clocks.fire(i, dir, t, if now_set { d } else { u }, bank)?;
                        self.refresh_exact(t, bank)?;
                    }
                    Scheme::Grid { .. } => {
                        let r = if now_set { self.down[i] } else { self.up[i] };
                        self.clocks.fire(i, dir, t, r, bank)?;
                        if self.clocks.next[i].is_finite() {
                            self.heap.push(Entry {
                                t: self.clocks.next[i],
                                site: i,
                            });
                        }
                    }
                }
                Ok(Some(i))
            }
        }
    }
}
