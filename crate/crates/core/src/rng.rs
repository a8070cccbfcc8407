//! Counter-based random streams: every `(seed, replica, step)` triple maps
//! to its own reproducible generator, so results do not depend on how
//! replicas are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for one replica at one step.
pub fn stream_rng(seed: u64, replica: u64, step: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    // 2^32 blocks of 16 words per step are far more than any step draws.
    rng.set_word_pos(u128::from(step) << 36);
    rng
}

/// Generator for a whole replica path.
pub fn replica_rng(seed: u64, replica: u64) -> StreamRng {
    stream_rng(seed, replica, 0)
}
