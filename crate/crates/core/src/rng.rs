//! Seed derivation: one master seed fans out into named, independent streams.
//!
//! Every source of randomness in the workspace draws from a `ChaCha8Rng`
//! obtained through [`stream_rng`]. The master seed selects the cipher key
//! and the (domain, index) pair selects the stream, so sub-streams are
//! independent by construction and reproducible regardless of thread
//! scheduling or job count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named randomness domains. Each (domain, index) pair is its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamDomain {
    PolicyInit = 1,
    TrainRollout = 2,
    TrainShuffle = 3,
    Sweep = 4,
    Certify = 5,
    Oracle = 6,
    PropertyCheck = 7,
}

const INDEX_MASK: u64 = (1u64 << 56) - 1;

/// Derive the RNG for `(domain, index)` under `master_seed`.
pub fn stream_rng(master_seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((domain as u64) << 56) | (index & INDEX_MASK));
    rng
}
