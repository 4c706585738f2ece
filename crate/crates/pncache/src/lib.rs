//! Simulation, exact verification and experiment tooling on top of
//! [`pncache_core`].
//!
//! * [`phylink`]: channels, precoders, symbol-level delivery and rate slopes.
//! * [`harness`]: the exact-arithmetic decodability oracle, experiment
//!   runner, scenario files and CSV/JSON emission.

pub mod error;
pub mod harness;
pub mod phylink;

pub use error::{PhyError, PhyResult};
