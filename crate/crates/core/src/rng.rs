//! Seeded random streams.
//!
//! Every artifact draws from its own ChaCha20 stream (`rand_chacha` 0.9): the
//! 64-bit seed selects the key and a fixed [`Stream`] tag selects the stream
//! id, so the dataset and the weights drawn from one seed never share state.

use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Dataset = 1,
    HomoWeights = 2,
    MlpWeights = 3,
    PowerIteration = 4,
}

pub fn stream(seed: u64, tag: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(tag as u64);
    rng
}
