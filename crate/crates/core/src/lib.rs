//! Locating a single-antenna terminal and estimating its clock offset from
//! OFDM pilots received on phase-synchronized radio stripes.
//!
//! A user terminal transmits OFDM pilots; each radio stripe (a uniform linear
//! array with a known pose) observes an M×K spatial-frequency matrix
//! corrupted by dense multipath (DMC) and thermal noise. This crate
//!
//! - synthesizes those observations ([`signal`], [`dmc`], [`geometry`]),
//! - jointly estimates 2D position, clock offset and phase offset by maximum
//!   likelihood, with carrier phase (CP) or without (NCP) ([`estimators`]),
//! - evaluates Cramér-Rao bounds on position and clock ([`bounds`]),
//! - and drives Monte-Carlo sweeps that emit CSV curves ([`harness`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

// Validation uses `!(x > 0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dmc;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod scalar;
pub mod scenario;
pub mod signal;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Scenario = scenario::ScenarioConfig<f64>;
pub type Stripe = geometry::StripePose<f64>;
pub type Ue = geometry::UeState<f64>;
pub type Link = geometry::LinkGeometry<f64>;
pub type Ofdm = signal::OfdmConfig<f64>;
pub type Observations = signal::ObservationSet<f64>;
pub type Dmc = dmc::DmcParams<f64>;
pub type Disturbance = dmc::DisturbanceModel<f64>;
pub type Estimate = estimators::EstimationResult<f64>;
pub type Bounds = bounds::BoundsResult<f64>;

#[cfg(test)]
mod testutil;
