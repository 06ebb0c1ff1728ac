//! Seeded, platform-independent randomness.
//!
//! Every stochastic step (splits, RP-tree directions, weight init, synthetic
//! data) draws from a [`ChaCha8Rng`] seeded from a 64-bit [`RngState`].
//! Independent sub-streams are derived with [`RngState::fork`], so runs in a
//! sweep never share a generator and can execute in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngState {
    seed: u64,
}

impl RngState {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh generator positioned at the start of this state's stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Derive an independent state for a labelled sub-task (splitmix64 mix).
    pub fn fork(&self, label: u64) -> RngState {
        let mut z = self
            .seed
            .wrapping_add(label.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngState::new(z ^ (z >> 31))
    }
}

impl Default for RngState {
    fn default() -> Self {
        RngState::new(0)
    }
}

impl From<u64> for RngState {
    fn from(seed: u64) -> Self {
        RngState::new(seed)
    }
}

/// Stream labels for [`RngState::fork`], kept in one place so no two
/// consumers collide.
pub mod streams {
    pub const SPLIT: u64 = 1;
    pub const TREE: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SYNTHETIC: u64 = 4;
    pub const POWER_RETRY: u64 = 5;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = RngState::new(7).rng().random_iter().take(16).collect();
        let b: Vec<u64> = RngState::new(7).rng().random_iter().take(16).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn forks_differ_from_parent_and_each_other() {
        let s = RngState::new(42);
        assert_ne!(s.fork(1), s);
        assert_ne!(s.fork(1), s.fork(2));
        assert_eq!(s.fork(3), s.fork(3));
    }

    #[test]
    fn chacha_stream_is_pinned() {
        // Guards against a silent generator change breaking saved experiments.
        let first: u64 = RngState::new(0).rng().random();
        assert_eq!(first, 13080132717333068652);
        // First splitmix64 output for state 0.
        assert_eq!(RngState::new(0).fork(0).seed(), 0xE220_A839_7B1D_CDAF);
    }
}
