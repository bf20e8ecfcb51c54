//! Shot-indexed random streams.
//!
//! Every shot owns a fixed window of the ChaCha8 keystream for the run's seed:
//! shot `k` reads words `[4k, 4k + 4)`, i.e. two `u64` draws. Any partition of
//! the shots into shards therefore sees exactly the same numbers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_SHOT: u128 = 4;

pub(crate) struct ShotStream {
    rng: ChaCha8Rng,
}

impl ShotStream {
    /// Positioned at the start of shot `first_shot`.
    pub(crate) fn new(seed: u64, first_shot: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(first_shot as u128 * WORDS_PER_SHOT);
        Self { rng }
    }

    /// The two uniforms in `[0, 1)` belonging to the next shot.
    pub(crate) fn next_shot(&mut self) -> (f64, f64) {
        (to_unit(self.rng.next_u64()), to_unit(self.rng.next_u64()))
    }
}

fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw from an ascending cumulative table whose last entry is
/// the total mass.
pub(crate) fn categorical(cumulative: &[f64], u: f64) -> usize {
    let target = u * cumulative.last().copied().unwrap_or(0.0);
    cumulative.iter().position(|&c| target < c).unwrap_or(cumulative.len() - 1)
}

pub(crate) fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p.max(0.0);
            Some(*acc)
        })
        .collect()
}
