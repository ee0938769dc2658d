//! Seeded random streams. Every episode owns one xoshiro256** stream whose seed
//! is a SplitMix64 mix of the master seed, the realization and the policy.

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;

pub type StreamRng = Xoshiro256StarStar;

/// Policy slot reserved for the stream that draws arm means.
pub const MEANS_TAG: u64 = u64::MAX;

pub fn stream(seed: u64) -> StreamRng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream used by `policy` in realization `realization`.
pub fn episode_seed(master: u64, realization: u64, policy: u64) -> u64 {
    let h = splitmix64(master);
    let h = splitmix64(h ^ realization);
    splitmix64(h ^ policy)
}

/// Uniform index into a tie set. Only call when there is an actual tie, so
/// untied decisions leave the stream untouched.
pub fn pick(rng: &mut StreamRng, len: usize) -> usize {
    debug_assert!(len > 1);
    rng.random_range(0..len)
}
