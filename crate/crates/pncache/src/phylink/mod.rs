//! Floating-point physical layer: bounded-density channels, precoders,
//! symbol transmission, cache-aided cancellation, detection and rates.
//!
//! All randomness comes from ChaCha8 streams keyed by `(seed, trial, purpose)`
//! so every draw is reproducible and independent of the order draws are made.

pub mod channel;
pub mod link;
pub mod precoder;
pub mod rates;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use channel::{sample_channel, ChannelRealization, TransmitterCsi};
pub use link::{cache_cancel, detect_and_reassemble, run_link, transmit_round, EffectiveGains, LinkReport};
pub use precoder::{make_precoders, make_zf_precoder, PrecoderSet};
pub use rates::{fit_dof_slope, measure_rates, RatePoint, SlopeFit};

/// ChaCha8 generator for `seed` on an independent `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Channel = 0,
    Precoder = 1,
    Noise = 2,
    Bits = 3,
    Demand = 4,
}

const PURPOSES: u64 = 8;

pub fn trial_rng(seed: u64, trial: u64, purpose: Purpose) -> ChaCha8Rng {
    stream_rng(seed, trial * PURPOSES + purpose as u64)
}
