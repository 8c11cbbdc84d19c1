//! Wideband beam selection for millimeter-wave MIMO downlinks with lens
//! antenna arrays.
//!
//! The crate models a base station whose lens array turns `N` antennas
//! into `N` beams, of which only `N_RF` can be connected to RF chains. It
//! provides
//!
//! - [`channel`]: OFDM channels with frequency-dependent steering (beam squint),
//! - [`beamspace`]: the lens DFT, beam sets and band-averaged beam energy,
//! - [`selection`]: the two-stage wideband selector and the MM, IA-BS,
//!   fully digital and exhaustive references,
//! - [`metrics`]: ZF precoding, sum-rate, energy efficiency and the rate gap
//!   to the fully digital system,
//! - [`harness`]: seeded Monte Carlo sweeps written as long-format CSV.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod beamspace;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
mod scalar;
pub mod selection;

pub use config::{Regularizer, SystemConfig};
pub use error::{Error, Result};
pub use scalar::{pairwise_sum, Real};

pub type ChannelSet64 = channel::ChannelSet<f64>;
pub type ChannelSet32 = channel::ChannelSet<f32>;
pub type Beamspace64 = beamspace::BeamspaceChannel<f64>;
pub type Beamspace32 = beamspace::BeamspaceChannel<f32>;
pub type LensMatrix64 = beamspace::LensMatrix<f64>;
pub type LensMatrix32 = beamspace::LensMatrix<f32>;
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type CMatrix32 = linalg::CMatrix<f32>;
pub type Diagnostics64 = selection::SelectionDiagnostics<f64>;
pub type RatePoint64 = metrics::RatePoint<f64>;
pub type GapPoint64 = metrics::GapPoint<f64>;
