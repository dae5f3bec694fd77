//! Fixed workloads shared by the criterion benches.

use locpack::instances::{gen_random, gen_tightness, SizeLaw, DEFAULT_DENOMINATOR};
use locpack::{Instance, Rational};

/// Random instance with sizes in `[lo, 1]`, seeded for repeatability.
pub fn random(n: usize, m: u32, lo: Rational, seed: u64) -> Instance {
    let law = SizeLaw::Uniform { lo, hi: Rational::ONE };
    gen_random(n, m, &law, seed, DEFAULT_DENOMINATOR)
        .expect("valid law")
        .instance
}

/// The level-scheme worst case for `ε = 1/2^j`.
pub fn tightness(j: u32, pairs: u32) -> Instance {
    let gamma = Rational::frac(1, (j as u128 - 1) << j);
    gen_tightness(j, gamma, pairs).expect("valid parameters").instance
}
