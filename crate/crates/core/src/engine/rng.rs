//! Per-purpose random streams.
//!
//! Every stream is ChaCha8 keyed by the episode seed (expanded to 256 bits by
//! `rand_core`'s PCG32-based `seed_from_u64`) with a 64-bit stream id of
//! `purpose << 32 | index`. ChaCha is counter based, so streams are independent
//! and a given (seed, purpose, index) always yields the same sequence,
//! regardless of how many other workers or draws exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Index used for the master node's streams.
pub const MASTER_INDEX: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Stream {
    Placement = 1,
    Velocity = 2,
    Compute = 3,
    Params = 4,
    Stragglers = 5,
    Data = 6,
    Failures = 7,
    Signal = 8,
}

pub fn stream_rng(seed: u64, purpose: Stream, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | index as u64);
    rng
}
