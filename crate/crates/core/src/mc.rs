//! Block-parallel Monte Carlo driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::tolerances::MC_SIGMAS;

/// Samples per block. Each block owns one RNG stream.
pub(crate) const BLOCK: usize = 1 << 14;

/// Mixes `seed` with a list of tags into a new seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for &t in tags {
        h = mix(h ^ mix(t.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    mix(h)
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Mean of `f` over `samples` draws with its `MC_SIGMAS`-sigma error.
///
/// Partial sums are merged in block order, so the result is bitwise identical
/// for any thread count.
pub(crate) fn mean_estimate<F>(samples: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    let partial: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let v = f(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    (mean, MC_SIGMAS * (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_seeds_differ_per_tag() {
        assert_ne!(derive_seed(1, &[0]), derive_seed(1, &[1]));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_eq!(derive_seed(7, &[3, 4]), derive_seed(7, &[3, 4]));
    }

    #[test]
    fn estimate_is_thread_count_independent() {
        let f = |r: &mut ChaCha8Rng| r.gen::<f64>();
        let a = mean_estimate(50_000, 3, f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mean_estimate(50_000, 3, f));
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert!((a.0 - 0.5).abs() < a.1);
    }
}
