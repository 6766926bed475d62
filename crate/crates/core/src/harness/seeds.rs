//! Seed derivation tree: master seed → scenario → trial → named stream.
//!
//! Each child seed is `splitmix64(parent ^ fnv1a(label))`, so any stream can
//! be regenerated from the master seed and its path alone, independent of
//! how trials are distributed across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node of the derivation tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedNode(pub u64);

impl SeedNode {
    pub fn child(self, label: &str) -> Self {
        SeedNode(splitmix64(self.0 ^ fnv1a(label.as_bytes())))
    }

    pub fn index(self, i: u64) -> Self {
        SeedNode(splitmix64(self.0 ^ splitmix64(i.wrapping_add(FNV_PRIME))))
    }

    pub fn scenario(master: u64, name: &str) -> Self {
        SeedNode(master).child("scenario").child(name)
    }

    pub fn trial(self, trial: u64) -> Self {
        self.child("trial").index(trial)
    }

    pub fn rng(self, stream: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.child(stream).0)
    }
}

/// Independent generators for one protocol run.
#[derive(Clone, Debug)]
pub struct RunStreams {
    /// Alice's own randomness: `x`, RCCBC strings.
    pub alice: ChaCha8Rng,
    /// `B_c`'s randomness: `L`, `J`, CHSH2's `L⁰`.
    pub bob: ChaCha8Rng,
    /// `B_i`'s randomness at `Q_i` (CHSH3).
    pub bob_q: [ChaCha8Rng; 2],
    /// Pair preparation: hidden bits and faults.
    pub devices: ChaCha8Rng,
    /// Measurement sampling and readout noise.
    pub noise: ChaCha8Rng,
}

impl RunStreams {
    pub fn new(node: SeedNode) -> Self {
        Self {
            alice: node.rng("alice"),
            bob: node.rng("bob"),
            bob_q: [node.rng("bob_q0"), node.rng("bob_q1")],
            devices: node.rng("devices"),
            noise: node.rng("noise"),
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self::new(SeedNode(seed))
    }
}
