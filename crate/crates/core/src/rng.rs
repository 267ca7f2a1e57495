//! Seeded random sources. Every stochastic component takes one of these
//! explicitly so runs are reproducible from a single master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Portable, version-stable generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One round of the SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`: `splitmix64(master + index)`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index))
}

/// Named sub-streams of a trial seed.
pub mod streams {
    pub const ENV: u64 = 1;
    pub const AGENT: u64 = 2;
    pub const INIT: u64 = 3;
    pub const MODEL_INIT: u64 = 4;
    pub const EVAL: u64 = 5;
}
