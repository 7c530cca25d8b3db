//! Named random sub-streams derived from one seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    InstanceGen,
    Vectors,
    MonteCarlo,
    Tournament,
    /// Extra streams, e.g. one per Monte-Carlo shard.
    Indexed(u64),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::InstanceGen => 1,
            Stream::Vectors => 2,
            Stream::MonteCarlo => 3,
            Stream::Tournament => 4,
            Stream::Indexed(k) => 1_000 + k,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
