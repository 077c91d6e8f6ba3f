//! Deterministic, thread-count-independent random sampling.
//!
//! Work is cut into fixed-size chunks; chunk `i` draws from its own ChaCha
//! stream seeded by `(seed, i)`, so results do not depend on how rayon
//! schedules the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::rational::Rational;

pub const CHUNK: u64 = 1024;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `f(rng, count)` over `total` samples split into chunks, in parallel,
/// returning per-chunk results in chunk order.
pub fn par_chunks<T, F>(total: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let count = CHUNK.min(total - i * CHUNK);
            let mut rng = chunk_rng(seed, i);
            f(&mut rng, count)
        })
        .collect()
}

/// Uniform rational `p/q` with `|p| <= max_num`, `1 <= q <= max_den`.
pub fn random_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    let p = rng.gen_range(-max_num..=max_num);
    let q = rng.gen_range(1..=max_den);
    Rational::new(p, q)
}

/// Uniform rational in `[0, 1]` with denominator at most `max_den`.
pub fn random_unit_rational<R: Rng>(rng: &mut R, max_den: i64) -> Rational {
    let q = rng.gen_range(1..=max_den);
    let p = rng.gen_range(0..=q);
    Rational::new(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunking_is_deterministic() {
        let a: Vec<u64> = par_chunks(5000, 7, |rng, count| {
            (0..count).map(|_| u64::from(rng.gen::<u32>())).sum()
        });
        let b: Vec<u64> = par_chunks(5000, 7, |rng, count| {
            (0..count).map(|_| u64::from(rng.gen::<u32>())).sum()
        });
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        let counts: Vec<u64> = par_chunks(5000, 7, |_, count| count);
        assert_eq!(counts.iter().sum::<u64>(), 5000);
    }

    #[test]
    fn unit_rationals_stay_in_range() {
        let mut rng = chunk_rng(1, 0);
        for _ in 0..1000 {
            let t = random_unit_rational(&mut rng, 50);
            assert!(!t.is_negative() && t <= 1);
        }
    }
}
