//! Exact scheme construction and trade-off calculators for the cache-aided
//! L×K MISO broadcast channel in which a fixed set of `K_P ≤ L` users report
//! perfect CSIT and the remaining `K_F = K − K_P` users only finite-precision
//! CSIT.
//!
//! The crate is `no_std` (with `alloc`) and contains no IO and no floating
//! point in its decision paths:
//!
//! * [`config`]: scenario validation ([`NetworkConfig`], [`Demand`], [`Library`]).
//! * [`subsets`]: cache-group bitsets and lexicographic subset enumeration.
//! * [`placement`]: subpacketization, cache states and memory sharing.
//! * [`delivery`]: transmission rounds, stream recipes and schedule statistics.
//! * [`metrics`]: NDT/DoF closed forms, convex envelopes and baselines.
//! * [`bounds`]: the converse-side lower bound and the factor-2.00884 gap check.
//! * [`exact`]: complex rationals and Gaussian-elimination null spaces.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bounds;
pub mod config;
pub mod delivery;
pub mod error;
pub mod exact;
pub mod metrics;
pub mod placement;
pub mod rational;
pub mod subsets;

pub use config::{validate_config, Demand, Library, NetworkConfig, RawConfig};
pub use error::{Error, Result};
pub use rational::Q;
pub use subsets::GroupSet;
