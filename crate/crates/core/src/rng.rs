//! Counter-keyed random streams.
//!
//! Every draw in the crate comes from a ChaCha8 generator whose 256-bit key
//! is the tuple `(seed, stream, a, b)`, so results do not depend on thread
//! scheduling or on how many trials were run before.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const STREAM_CHANNEL: u64 = 1;
pub const STREAM_MATCHING: u64 = 2;
pub const STREAM_GRAPH: u64 = 3;
pub const STREAM_CONDITIONAL: u64 = 4;
pub const STREAM_STRATUM: u64 = 5;
pub const STREAM_FILLER: u64 = 6;
pub const STREAM_FADING: u64 = 7;

pub fn keyed(seed: u64, stream: u64, a: u64, b: u64) -> Rng {
    let mut key = [0u8; 32];
    for (i, w) in [seed, stream, a, b].iter().enumerate() {
        key[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
