//! Counter-based seed derivation: a master seed expands to one independent
//! stream per task index, so parallel schedules cannot change results.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for task `counter` under `master`: splitmix64(master + splitmix64(counter)).
pub fn task_seed(master: u64, counter: u64) -> u64 {
    splitmix64(master.wrapping_add(splitmix64(counter)))
}

/// Deterministic per-task RNG.
pub fn task_rng(master: u64, counter: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(task_seed(master, counter))
}
