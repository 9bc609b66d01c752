//! Seed splitting.
//!
//! Every random consumer derives its generator from the single run seed plus
//! a fixed stream id. ChaCha streams are independent counters over the same
//! key, so each consumer is reproducible on its own regardless of what else
//! ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const SAMPLE: u64 = 1;
pub const WORKSPACE: u64 = 2;
pub const PLANNER_REFERENCE: u64 = 3;
pub const PLANNER_NOISE: u64 = 4;
pub const DEMOS: u64 = 5;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
