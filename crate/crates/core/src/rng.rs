//! Seeded randomness. Per-pixel noise uses a counter-based hash so results do
//! not depend on traversal order; sequential draws use ChaCha8.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform in (0, 1) keyed by `(seed, stream, counter)`.
#[inline]
pub(crate) fn hash_uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(stream.wrapping_mul(0xD6E8_FEB8_6659_FD93) ^ counter));
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal keyed by `(seed, stream, counter)` (Box-Muller).
#[inline]
pub(crate) fn hash_normal(seed: u64, stream: u64, counter: u64) -> f64 {
    let u1 = hash_uniform(seed, stream, counter.wrapping_mul(2));
    let u2 = hash_uniform(seed, stream, counter.wrapping_mul(2).wrapping_add(1));
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}
