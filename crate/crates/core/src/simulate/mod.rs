//! Samplers for spin-system paths: the exact jump process, the Euler and
//! midpoint site-decoupled schemes, the independent-site approximation and a
//! Poisson tau-leaping demonstrator.

mod exact;
mod grid;
mod tau_leap;

pub use exact::simulate_exact;
pub(crate) use grid::frozen_rates;
pub use grid::{
    simulate_euler, simulate_grid, simulate_independent_sites, simulate_midpoint, GridScheme, RhoPath,
    PREDICTOR_TOLERANCE,
};
pub use tau_leap::{simulate_poisson_tau_leap, TauLeapRecord};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RateModel;
use crate::rng::{Domain, StreamRng};
use crate::scalar::Scalar;
use crate::state::SpinState;

/// Initial condition of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    /// Independent Bernoulli(p) sites drawn from the run seed.
    Bernoulli {
        p: f64,
    },
    /// `⌊p n⌋` occupied sites at evenly spaced indices.
    Fraction {
        p: f64,
    },
    Explicit {
        bits: Vec<u8>,
    },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Bernoulli { p: 0.5 }
    }
}

impl InitSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            InitSpec::Bernoulli { p } | InitSpec::Fraction { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::config(format!("init: p = {p} is outside [0, 1]")));
                }
            }
            InitSpec::Explicit { bits } => {
                if bits.len() != n {
                    return Err(Error::config(format!(
                        "init: explicit state has {} sites, model has {n}",
                        bits.len()
                    )));
                }
                SpinState::from_bits(bits.clone())?;
            }
        }
        Ok(())
    }

    /// Draws `η(0)`.
    pub fn realize(&self, n: usize, seed: u64) -> Result<SpinState> {
        self.validate(n)?;
        Ok(match self {
            InitSpec::Bernoulli { p } => {
                let mut rng = StreamRng::new(seed, Domain::Init, 0);
                SpinState::from_bools((0..n).map(|_| rng.uniform_open() < *p))
            }
            InitSpec::Fraction { p } => {
                let k = (p * n as f64 + 1e-9).floor() as usize;
                let mut s = SpinState::zeros(n);
                for m in 0..k {
                    s.set(m * n / k, true);
                }
                s
            }
            InitSpec::Explicit { bits } => SpinState::from_bits(bits.clone())?,
        })
    }

    /// Initial condition `ρ(0)` of the deterministic companions: the mean of
    /// the initial law, which for deterministic inits is `η(0)` itself.
    pub fn mean<T: Scalar>(&self, n: usize) -> Result<Vec<T>> {
        match self {
            InitSpec::Bernoulli { p } => {
                self.validate(n)?;
                Ok(vec![T::lit(*p); n])
            }
            _ => Ok(self.realize(n, 0)?.to_real()),
        }
    }
}

/// Sampling method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Euler,
    Midpoint,
    Independent,
    TauLeap,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Euler => "euler",
            Method::Midpoint => "midpoint",
            Method::Independent => "independent",
            Method::TauLeap => "tau-leap",
        }
    }

    pub fn uses_grid(self) -> bool {
        self != Method::Exact
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" | "gillespie" => Method::Exact,
            "euler" => Method::Euler,
            "midpoint" => Method::Midpoint,
            "independent" => Method::Independent,
            "tau-leap" => Method::TauLeap,
            other => {
                return Err(Error::config(format!(
                    "unknown method {other:?} (expected exact, euler, midpoint, independent or tau-leap)"
                )))
            }
        })
    }
}

/// Run parameters shared by all samplers.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub t_end: T,
    /// Step size of the grid methods; ignored by the exact sampler.
    pub delta: Option<T>,
    pub seed: u64,
    /// Recording cadence; defaults to `10 δ` (or `t_end / 100` without a grid).
    pub sample_every: Option<T>,
    pub init: InitSpec,
    /// Keep the full state at every sample.
    pub snapshots: bool,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(t_end: T, delta: Option<T>, seed: u64) -> Self {
        Self {
            t_end,
            delta,
            seed,
            sample_every: None,
            init: InitSpec::default(),
            snapshots: false,
        }
    }

    pub fn with_init(mut self, init: InitSpec) -> Self {
        self.init = init;
        self
    }

    pub fn with_sample_every(mut self, every: T) -> Self {
        self.sample_every = Some(every);
        self
    }

    pub fn with_snapshots(mut self, on: bool) -> Self {
        self.snapshots = on;
        self
    }

    /// The step size, required by grid methods.
    pub fn require_delta(&self) -> Result<T> {
        match self.delta {
            Some(d) if d > T::zero() && d.is_finite() => Ok(d),
            Some(d) => Err(Error::config(format!("delta must be positive and finite, got {d}"))),
            None => Err(Error::config("missing field \"delta\" (required by grid methods)")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > T::zero() && self.t_end.is_finite()) {
            return Err(Error::config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if let Some(s) = self.sample_every {
            if !(s > T::zero() && s.is_finite()) {
                return Err(Error::config(format!("sample_every must be positive, got {s}")));
            }
        }
        Ok(())
    }

    pub fn effective_sample_every(&self) -> T {
        self.sample_every.unwrap_or_else(|| match self.delta {
            Some(d) => T::lit(10.0) * d,
            None => self.t_end / T::lit(100.0),
        })
    }

    /// Recording times `j · sample_every ≤ t_end`.
    pub fn sample_times(&self) -> Vec<T> {
        let every = self.effective_sample_every();
        let count = (self.t_end / every + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
        (0..=count).map(|j| T::from_count(j) * every).collect()
    }

    /// Number of grid steps and the recording stride in steps.
    pub fn grid_plan(&self) -> Result<(usize, usize)> {
        self.validate()?;
        let delta = self.require_delta()?;
        let steps = (self.t_end / delta + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
        let every = self.effective_sample_every();
        let ratio = every / delta;
        let stride = ratio.round();
        if stride < T::one() || (ratio - stride).abs() > T::lit(1e-6) * ratio.max(T::one()) {
            return Err(Error::config(format!(
                "sample_every = {every} is not a multiple of delta = {delta}"
            )));
        }
        Ok((steps, stride.to_usize().unwrap_or(1)))
    }
}

/// Summary of one simulated path.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord<T> {
    pub times: Vec<T>,
    /// Fraction of occupied sites at each sample.
    pub occupancy: Vec<T>,
    /// Cumulative number of transitions at each sample.
    pub events_cum: Vec<u64>,
    pub snapshots: Option<Vec<SpinState>>,
    pub event_count: u64,
    /// Wall time of the run; excluded from equality.
    pub wall_ns: u128,
    pub final_state: SpinState,
}

impl<T: PartialEq> PartialEq for TrajectoryRecord<T> {
    fn eq(&self, other: &Self) -> bool {
        self.times == other.times
            && self.occupancy == other.occupancy
            && self.events_cum == other.events_cum
            && self.snapshots == other.snapshots
            && self.event_count == other.event_count
            && self.final_state == other.final_state
    }
}

pub(crate) struct Recorder<T> {
    rec: TrajectoryRecord<T>,
}

impl<T: Scalar> Recorder<T> {
    pub(crate) fn new(snapshots: bool, n: usize) -> Self {
        Self {
            rec: TrajectoryRecord {
                times: Vec::new(),
                occupancy: Vec::new(),
                events_cum: Vec::new(),
                snapshots: snapshots.then(Vec::new),
                event_count: 0,
                wall_ns: 0,
                final_state: SpinState::zeros(n),
            },
        }
    }

    pub(crate) fn record(&mut self, t: T, state: &SpinState, events: u64) {
        self.rec.times.push(t);
        self.rec.occupancy.push(state.occupancy());
        self.rec.events_cum.push(events);
        if let Some(s) = &mut self.rec.snapshots {
            s.push(state.clone());
        }
    }

    pub(crate) fn finish(mut self, state: SpinState, events: u64, start: std::time::Instant) -> TrajectoryRecord<T> {
        self.rec.event_count = events;
        self.rec.final_state = state;
        self.rec.wall_ns = start.elapsed().as_nanos();
        self.rec
    }
}

/// Probability that a two-state chain with constant rates `q_up` (0→1) and
/// `q_down` (1→0), started at `eta_i`, is in state 1 after time `delta`.
pub fn transition_probability<T: Scalar>(q_up: T, q_down: T, eta_i: bool, delta: T) -> Result<T> {
    if !(q_up >= T::zero() && q_down >= T::zero()) || !q_up.is_finite() || !q_down.is_finite() {
        return Err(Error::Domain(format!(
            "rates must be finite and nonnegative, got q_up = {q_up}, q_down = {q_down}"
        )));
    }
    if delta.is_nan() || delta < T::zero() {
        return Err(Error::Domain(format!("delta must be nonnegative, got {delta}")));
    }
    Ok(transition_probability_unchecked(q_up, q_down, eta_i, delta))
}

#[inline]
pub(crate) fn transition_probability_unchecked<T: Scalar>(q_up: T, q_down: T, eta_i: bool, delta: T) -> T {
    let total = q_up + q_down;
    let one = T::one();
    if total == T::zero() {
        return if eta_i { one } else { T::zero() };
    }
    let relax = -(-delta * total).exp_m1();
    if eta_i {
        one - q_down / total * relax
    } else {
        q_up / total * relax
    }
}

pub(crate) fn check_model_len<T: Scalar, M: RateModel<T> + ?Sized>(model: &M, state: &SpinState) -> Result<()> {
    crate::error::check_len("initial state", state.len(), model.size())
}
