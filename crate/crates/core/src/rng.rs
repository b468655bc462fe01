//! Named, splittable random streams.
//!
//! Every random quantity in an experiment is drawn from a ChaCha8 stream
//! addressed by `(seed, name, index)`. The name selects a component
//! (graph, disorder, perturbation, mcmc, ...) and the index a replica or
//! work item, so results do not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed(u64);

impl StreamSeed {
    pub fn new(seed: u64) -> Self {
        StreamSeed(seed)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Generator for work item `index` of component `name`.
    pub fn stream(self, name: &str, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.0 ^ fnv1a(name)));
        rng.set_stream(index);
        rng
    }

    /// Independent seed for a sub-experiment.
    pub fn child(self, name: &str, index: u64) -> StreamSeed {
        StreamSeed(mix(mix(self.0 ^ fnv1a(name)).wrapping_add(mix(index))))
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
