//! Seeded randomness helpers. Every random quantity in the crate flows
//! through a `ChaCha8Rng` constructed from an explicit seed, so runs are
//! reproducible bit for bit.

use alloc::vec::Vec;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;

/// Mixes a base seed with a stream index (splitmix64 finalizer), for
/// deriving per-call seeds without correlation between streams.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard normal draw (Box-Muller; two uniforms per pair of calls
/// would be marginally cheaper, but this keeps the stream layout simple).
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos()
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| standard_normal(rng)).collect()
}

/// Uniform point on the unit sphere in R^len.
pub fn unit_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let mut v = gaussian_vec(rng, len);
        let n = linalg::norm(&v);
        if n > 1e-12 {
            linalg::scale(&mut v, 1.0 / n);
            return v;
        }
    }
}
