//! Deterministic RNG streams.
//!
//! Every randomized campaign derives one independent stream per work item
//! from a `(master_seed, stream_index)` pair, so results do not depend on
//! thread scheduling or execution order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step, used only to expand seeds into key material.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for stream `stream` of the generator keyed by `master`.
///
/// Streams with distinct `(master, stream)` pairs are statistically
/// independent for all practical purposes.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut state = master ^ 0x6a09_e667_f3bc_c908;
    let mut key = [0u8; 32];
    let a = splitmix64(&mut state);
    state ^= stream.wrapping_mul(0xd6e8_feb8_6659_fd93);
    let b = splitmix64(&mut state);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    key[0..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
