//! Deterministic seed derivation.
//!
//! Every stochastic component gets its own stream derived from the run seed
//! and a label, so adding a consumer never perturbs the others.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// FNV-1a over the label, folded into the master seed.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ master.wrapping_mul(0x9e3779b97f4a7c15)
}

pub fn stream(master: u64, label: &str) -> Rng {
    Rng::seed_from_u64(derive_seed(master, label))
}
