//! Seed derivation for independent, scheduling-agnostic random streams.
//!
//! Every consumer of randomness (topology sampling, per-node data, per-node
//! initialization, per-node per-round training, random attack plans) draws
//! from its own ChaCha stream keyed by the master seed and a path of labels.
//! Streams never depend on the order in which other streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream purposes. The numeric values are part of the reproducibility
/// contract; do not renumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Topology = 1,
    Data = 2,
    Init = 3,
    Train = 4,
    Plan = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `path` into `master` one label at a time.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

pub fn stream(master: u64, purpose: Purpose, path: &[u64]) -> SimRng {
    let mut full = Vec::with_capacity(path.len() + 1);
    full.push(purpose as u64);
    full.extend_from_slice(path);
    SimRng::seed_from_u64(derive_seed(master, &full))
}

pub fn node_stream(master: u64, purpose: Purpose, node: usize) -> SimRng {
    stream(master, purpose, &[node as u64])
}

/// Training stream for `node` in 1-based `round`.
pub fn round_stream(master: u64, node: usize, round: usize) -> SimRng {
    stream(master, Purpose::Train, &[node as u64, round as u64])
}
