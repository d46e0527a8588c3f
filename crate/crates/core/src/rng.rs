//! Named random substreams derived from one root seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent streams so that changing how one component consumes
/// randomness never reshuffles another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init = 1,
    Env = 2,
    ActorNoise = 3,
    BufferSampling = 4,
    GateNoise = 5,
    Folds = 6,
}

pub fn substream(root_seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(stream as u64);
    rng
}
