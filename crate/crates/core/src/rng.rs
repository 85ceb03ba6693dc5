//! Reproducible random streams.
//!
//! Every replica draws from its own ChaCha stream, addressed by
//! `(seed, domain, replica)`. The mapping does not depend on how rayon
//! splits the work, so results are identical for any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Separates independent uses of the same user seed (dynamics replicas,
/// stationary samples, bootstrap, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Dynamics = 1,
    Stationary = 2,
    Bootstrap = 3,
    Initial = 4,
    Walks = 5,
    Support = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for replica `index` within `domain`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain as u64)));
    rng.set_stream(index);
    rng
}
