//! Derived seed streams.
//!
//! Every random decision in the pipeline draws from its own seed, derived
//! deterministically from the master seed. This keeps components isolated:
//! changing the number of walks does not perturb negative sampling, fold
//! assignment does not perturb initialization, and so on.

pub const STREAM_INIT: u64 = 1;
pub const STREAM_SHUFFLE: u64 = 2;
pub const STREAM_NEGATIVES: u64 = 3;
pub const STREAM_WALKS: u64 = 4;
pub const STREAM_GROUNDING: u64 = 5;
pub const STREAM_FOLDS: u64 = 6;
pub const STREAM_SYNTH: u64 = 7;
pub const STREAM_FOLD_TRAIN: u64 = 100;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fold one value into a seed. Order-sensitive, so `chain(chain(s,a),b)`
/// differs from `chain(chain(s,b),a)`.
pub fn chain(seed: u64, value: u64) -> u64 {
    splitmix64(seed ^ splitmix64(value))
}

/// Seed for a named stream of the master seed.
pub fn derive(master: u64, stream: u64) -> u64 {
    chain(master, stream)
}
