//! Per-path random streams. Path `i` of a batch seeded with `s` reads
//! ChaCha8 stream `i` under key `s`, so streams are independent of each
//! other and of scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type PathRng = ChaCha8Rng;

pub fn path_rng(master_seed: u64, path_id: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_id);
    rng
}

/// A uniform draw on `[0, 1)` with 32 bits of resolution.
#[inline(always)]
pub fn uniform(rng: &mut PathRng) -> f64 {
    rng.next_u32() as f64 * (1.0 / 4_294_967_296.0)
}
