//! Counter-based random streams.
//!
//! Every draw is a pure function of `(seed, stream, index)`: the ChaCha8 key
//! is built from the seed and a domain tag, the stream id selects the ChaCha
//! stream, and the index fixes the word position. Results therefore do not
//! depend on thread count or evaluation order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::walsh::Path;

const SIGN_DOMAIN: u64 = 0x5349_474e_5041_5448; // "SIGNPATH"
const GAUSS_DOMAIN: u64 = 0x4741_5553_5349_414e; // "GAUSSIAN"

fn keyed(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Sign path number `index`: coordinate `j` (zero-based) is bit `j mod 64` of
/// the `⌊j/64⌋`-th 64-bit word of the stream.
pub fn sign_path(seed: u64, index: u64, n: usize) -> Path {
    let mut rng = keyed(seed, SIGN_DOMAIN, index);
    let mut signs = Vec::with_capacity(n);
    let mut word = 0u64;
    for j in 0..n {
        if j % 64 == 0 {
            word = rng.next_u64();
        }
        signs.push(if word >> (j % 64) & 1 == 1 { 1 } else { -1 });
    }
    Path::from_signs_unchecked(signs)
}

#[inline]
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal draw `index` of `stream`, by Box–Muller on the two 64-bit
/// words at positions `2·index` and `2·index + 1`.
pub fn standard_normal(seed: u64, stream: u64, index: u64) -> f64 {
    let mut rng = keyed(seed, GAUSS_DOMAIN, stream);
    rng.set_word_pos(4 * index as u128);
    let u1 = open_unit(rng.next_u64());
    let u2 = open_unit(rng.next_u64());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
