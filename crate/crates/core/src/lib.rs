//! Exact and site-decoupled approximate simulation of finite long-range spin
//! systems.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! crate-root aliases fix the scalar to `f64`.

pub mod coupling;
pub mod deterministic;
pub mod error;
pub mod fastsum;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod state;

pub use error::{Error, Result};
pub use model::{NormConstants, RateModel};
pub use scalar::Scalar;
pub use state::SpinState;

pub type GaussConv1D = model::GaussConv1DModel<f64>;
pub type IsingKac2D = model::IsingKac2DModel<f64>;
pub type Dense = model::DenseModel<f64>;
pub type Model = model::AnyModel<f64>;
pub type Norms = NormConstants<f64>;
