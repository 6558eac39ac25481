//! Seeded RNG construction and stream derivation.
//!
//! Everything stochastic in this crate flows through `ChaCha8Rng` seeded
//! from explicit `u64` seeds, so any pipeline stage replays exactly. Work
//! that parallelizes over an index (sequences, trials, bootstrap
//! iterations) derives one stream per index, making results independent
//! of the parallel schedule.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG from a seed.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for item `index` under a master seed (seed XOR index).
pub fn derived(master: u64, index: u64) -> ChaCha8Rng {
    seeded(master ^ index)
}

/// Stream for a labeled substream (layer/parameter-class style derivation).
///
/// Mixes the label into the seed so that adding or removing one substream
/// never shifts the draws of another.
pub fn labeled(master: u64, label: &str) -> ChaCha8Rng {
    // FNV-1a over the label bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in label.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    seeded(master ^ h)
}
