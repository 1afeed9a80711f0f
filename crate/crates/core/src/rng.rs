//! Counter-based random streams.
//!
//! Every parallel unit of work draws from its own ChaCha stream, addressed by
//! `(seed, stream)`. Results depend only on that pair, never on thread
//! scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Independent stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream-id namespaces, one per stage of a run.
pub mod tag {
    pub const MIXTURE_SET: u64 = 1 << 40;
    pub const OUTER: u64 = 2 << 40;
    pub const ETA_PATTERNS: u64 = 3 << 40;
    pub const IDENTITY_LEFT: u64 = 4 << 40;
    pub const IDENTITY_RIGHT: u64 = 5 << 40;
    pub const VERIFY: u64 = 6 << 40;
    pub const SIMULATE: u64 = 7 << 40;
}
