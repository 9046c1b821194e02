//! Counter-based seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a seed
//! derived from the master seed and a short list of integer tags (domain,
//! replicate, fold, ...), with the row or item index used as the ChaCha
//! stream id. Output is therefore independent of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags, so that independent consumers of one master seed never share a stream.
pub mod tag {
    pub const ADJACENCY: u64 = 0x01;
    pub const LATENT: u64 = 0x02;
    pub const THETA: u64 = 0x03;
    pub const EIGEN_START: u64 = 0x04;
    pub const ECV_MASK: u64 = 0x05;
    pub const REPLICATE: u64 = 0x06;
    pub const ECV_EIGEN: u64 = 0x07;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes `tags` into `seed`; distinct tag lists give unrelated seeds.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ 0x6A09_E667_F3BC_C908);
    for &t in tags {
        h = splitmix64(h ^ splitmix64(t.wrapping_add(0x3C6E_F372_FE94_F82B)));
    }
    h
}

/// Generator for item `stream` under the derived seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
