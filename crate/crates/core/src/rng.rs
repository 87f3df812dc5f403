//! Portable random streams.
//!
//! Every stochastic draw in the crate goes through [`SimRng`], which is
//! xoshiro256++ seeded from a single `u64` through SplitMix64 (the reference
//! seeding procedure for the xoshiro family). Uniform doubles take the top 53
//! bits of each output, and Poisson counts use sequential inversion, so the
//! whole pipeline can be reproduced in any language from the seed alone.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

pub fn rng_from_seed(seed: u64) -> SimRng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// One SplitMix64 output step applied to `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` under `master`.
pub fn realization_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index))
}

/// Uniform double in `[0, 1)`.
pub fn uniform01(rng: &mut SimRng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform_in(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

// Inversion is exact while exp(-mean) stays normal; larger means are split
// into independent chunks (Poisson additivity).
const MAX_INVERSION_MEAN: f64 = 500.0;

/// Poisson-distributed count with the given mean.
pub fn poisson(rng: &mut SimRng, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    if mean > MAX_INVERSION_MEAN {
        let chunks = (mean / MAX_INVERSION_MEAN).ceil();
        let part = mean / chunks;
        return (0..chunks as u64).map(|_| poisson(rng, part)).sum();
    }
    let u = uniform01(rng);
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p == 0.0 {
            break;
        }
    }
    k
}
