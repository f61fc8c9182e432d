//! Seeded randomness.
//!
//! Every stochastic operation draws from a ChaCha8 generator (a counter-based
//! stream cipher RNG, stable across platforms and releases) derived from the
//! scenario seed plus a fixed per-consumer stream id. Modules therefore cannot
//! perturb each other's draws, and a rerun with the same seed is bit-identical.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Stream ids, one per consumer of randomness.
pub mod stream {
    pub const DEPLOY: u64 = 1;
    pub const SHADOWING: u64 = 2;
    pub const ATTACK: u64 = 3;
    pub const AUTOENCODER: u64 = 4;
    pub const SPLIT: u64 = 5;
    pub const KPI: u64 = 6;
}

/// Generator for `(seed, stream)`.
pub fn seeded(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Mixes auxiliary indices into a seed (splitmix64 finalizer), so per-cell or
/// per-rate sub-experiments get decorrelated but reproducible seeds.
pub fn mix(seed: u64, a: u64, b: u64) -> u64 {
    splitmix(seed ^ splitmix(a ^ splitmix(b)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
