//! Seeded random quantum access structures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::structure::{AccessStructure, PlayerSet, Universe};

/// A random quantum access structure on `n` players.
///
/// Random non-empty sets are proposed and kept whenever they meet every set
/// kept so far, so the result is always pairwise intersecting. Players may
/// end up in no minimal set.
pub fn random_quantum<R: Rng>(rng: &mut R, n: usize, attempts: usize) -> Result<AccessStructure> {
    let full = PlayerSet::full(n);
    let mut kept: Vec<PlayerSet> = Vec::new();
    for _ in 0..attempts.max(1) {
        let set = loop {
            let s = PlayerSet::from_bits(rng.random::<u32>()).intersection(full);
            if !s.is_empty() {
                break s;
            }
        };
        if kept.iter().all(|k| k.intersects(set)) {
            kept.push(set);
        }
    }
    AccessStructure::new(Universe::numbered(n)?, kept)
}

/// `count` structures with `min_n ≤ n ≤ max_n`, reproducible from `seed`.
pub fn campaign(seed: u64, count: usize, min_n: usize, max_n: usize) -> Result<Vec<AccessStructure>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(min_n..=max_n);
            let attempts = rng.random_range(1..=3 * n);
            random_quantum(&mut rng, n, attempts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_and_reproducible() {
        let a = campaign(7, 50, 2, 6).unwrap();
        assert_eq!(a, campaign(7, 50, 2, 6).unwrap());
        assert!(a.iter().all(AccessStructure::is_quantum));
        assert!(a.iter().any(|g| g.r() >= 4));
    }
}
