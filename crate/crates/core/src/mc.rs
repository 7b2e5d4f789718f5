//! Deterministic, thread-count independent Monte Carlo hit counting.
//!
//! The sample index range is split into fixed chunks of [`CHUNK_SIZE`]
//! samples. Chunk `c` of stream `s` draws from a ChaCha8 generator seeded
//! with `derive_seed(seed, s, c)`, so each chunk's hits depend only on
//! `(seed, stream, chunk)`. Hit counts are integers, so the reduction is
//! exact in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Samples per chunk. Changing it changes every estimate.
pub const CHUNK_SIZE: u64 = 8192;

pub type McRng = ChaCha8Rng;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for chunk `chunk` of stream `stream`.
pub fn derive_seed(seed: u64, stream: u64, chunk: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ stream.wrapping_mul(0xD134_2543_DE82_EF95)) ^ chunk)
}

pub fn rng_for(seed: u64, stream: u64, chunk: u64) -> McRng {
    McRng::seed_from_u64(derive_seed(seed, stream, chunk))
}

/// Hit count and binomial error of a uniform-sampling volume estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
}

impl McEstimate {
    /// Scales a hit fraction by the volume of the sampling domain.
    pub fn from_hits(hits: u64, samples: u64, domain_volume: f64) -> Self {
        if samples == 0 {
            return Self {
                estimate: 0.0,
                stderr: 0.0,
                hits: 0,
                samples: 0,
            };
        }
        let p = hits as f64 / samples as f64;
        Self {
            estimate: domain_volume * p,
            stderr: domain_volume * (p * (1.0 - p) / samples as f64).sqrt(),
            hits,
            samples,
        }
    }

    pub fn zero() -> Self {
        Self::from_hits(0, 0, 0.0)
    }
}

/// Counts samples for which `hit` returns true.
///
/// `init` builds per-chunk scratch state; `hit` receives the chunk rng and
/// that state once per sample.
pub fn count_hits<S, I, F>(samples: u64, seed: u64, stream: u64, init: I, hit: F) -> u64
where
    I: Fn() -> S + Sync,
    F: Fn(&mut McRng, &mut S) -> bool + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            let mut rng = rng_for(seed, stream, c);
            let mut state = init();
            let mut hits = 0u64;
            for _ in 0..len {
                hits += u64::from(hit(&mut rng, &mut state));
            }
            hits
        })
        .sum()
}

/// Sequential variant of [`count_hits`] producing identical counts; used
/// where an outer loop is already parallel.
pub fn count_hits_seq<S, I, F>(samples: u64, seed: u64, stream: u64, init: I, mut hit: F) -> u64
where
    I: Fn() -> S,
    F: FnMut(&mut McRng, &mut S) -> bool,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let mut total = 0;
    for c in 0..chunks {
        let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
        let mut rng = rng_for(seed, stream, c);
        let mut state = init();
        for _ in 0..len {
            total += u64::from(hit(&mut rng, &mut state));
        }
    }
    total
}

/// Fixed-order sum of per-item results computed in parallel.
pub fn ordered_sum<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = items.par_iter().map(f).collect();
    parts.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn seq_and_par_agree() {
        let f = |rng: &mut McRng, _: &mut ()| rng.random::<f64>() < 0.3;
        let a = count_hits(100_003, 9, 2, || (), f);
        let b = count_hits_seq(100_003, 9, 2, || (), f);
        assert_eq!(a, b);
        let frac = a as f64 / 100_003.0;
        assert!((frac - 0.3).abs() < 0.01);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| count_hits(50_000, 1, 0, || (), |r: &mut McRng, _: &mut ()| r.random::<bool>()))
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn streams_differ() {
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
        assert_ne!(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
    }

    #[test]
    fn binomial_error() {
        let e = McEstimate::from_hits(25, 100, 2.0);
        assert_eq!(e.estimate, 0.5);
        assert!((e.stderr - 2.0 * (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(McEstimate::from_hits(0, 10, 1.0).stderr, 0.0);
    }
}
