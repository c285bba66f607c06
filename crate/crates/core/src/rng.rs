//! Portable seeded randomness.
//!
//! All draws go through ChaCha20 (`rand_chacha::ChaCha20Rng`, 20 rounds,
//! seeded with `seed_from_u64`), whose output stream is fixed by the
//! algorithm. The derived operations below (bounded integers, shuffles,
//! unit floats) are spelled out here rather than delegated so their exact
//! arithmetic cannot drift with library versions:
//!
//! * `below(n)`: rejection sampling on `next_u64`, rejecting values at or
//!   above the largest multiple of `n`, then `value % n`.
//! * `shuffle`: Fisher–Yates from the last index down, swapping `i` with
//!   `below(i + 1)`.
//! * `unit_f64`: top 53 bits of `next_u64` divided by 2^53.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub struct PortableRng(ChaCha20Rng);

impl PortableRng {
    pub fn new(seed: u64) -> Self {
        PortableRng(ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..n`. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// A uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

/// Combines a seed with a sequence of tags into a new well-mixed seed
/// (SplitMix64 finalizer applied after each absorbed word).
pub fn mix_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix(seed);
    for &t in tags {
        h = splitmix(h ^ t);
    }
    h
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
