//! Transmit-power allocation for fixed-gain amplify-and-forward relay
//! assisted OFDM with index modulation (OFDM-IM).
//!
//! The source and the relay each spread their power over the `T` active
//! subcarriers of an `N`-subcarrier block. The crate minimises `Pt + Pr`
//! subject to a block-outage ceiling, using only channel statistics:
//!
//! * [`specfun`]: `K1` and the scaled exponential integral.
//! * [`sysmodel`]: link parameters, per-subcarrier SNR, channel sampling,
//!   activation-pattern codec.
//! * [`outage`]: closed-form outage probability and mean SNR.
//! * [`optimizer`]: fixed-point KKT solver, brute-force grid oracle,
//!   equal-power baseline, complexity benchmark.
//! * [`montecarlo`]: trial-level simulation used to validate the analytics.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod allocation;
pub mod error;
pub mod montecarlo;
pub mod optimizer;
pub mod outage;
pub mod scalar;
pub mod specfun;
pub mod sysmodel;

pub use allocation::Provenance;
pub use error::{Error, Result};
pub use scalar::{from_db, to_db, Scalar};
pub use sysmodel::SapCodec;

pub type SystemParams = sysmodel::SystemParams<f64>;
pub type PowerAllocation = allocation::PowerAllocation<f64>;
pub type ReliabilityTarget = outage::ReliabilityTarget<f64>;
pub type ChannelDraw = sysmodel::ChannelDraw<f64>;
pub type SolverConfig = optimizer::SolverConfig<f64>;
pub type AllocationResult = optimizer::AllocationResult<f64>;
pub type OutageEstimate = montecarlo::OutageEstimate<f64>;

pub type SystemParams32 = sysmodel::SystemParams<f32>;
pub type PowerAllocation32 = allocation::PowerAllocation<f32>;
pub type ReliabilityTarget32 = outage::ReliabilityTarget<f32>;
pub type AllocationResult32 = optimizer::AllocationResult<f32>;
