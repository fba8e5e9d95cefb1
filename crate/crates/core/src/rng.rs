//! Deterministic random streams addressed by `(master seed, purpose tag, index...)`.
//!
//! Every unit of parallel work (a bootstrap replicate, a simulated dataset)
//! derives its own stream from its address, so results never depend on which
//! thread ran what or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator handed out by [`RngStream::rng`].
pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    key: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream {
            key: splitmix64(master_seed),
        }
    }

    /// Child stream for a named purpose.
    pub fn tagged(self, tag: &str) -> Self {
        self.mix(fnv1a(tag.as_bytes()))
    }

    /// Child stream for the `i`-th unit of work.
    pub fn index(self, i: u64) -> Self {
        self.mix(splitmix64(i ^ 0x5851_f42d_4c95_7f2d))
    }

    fn mix(self, v: u64) -> Self {
        RngStream {
            key: splitmix64(self.key ^ v.rotate_left(17)),
        }
    }

    /// A 64-bit value identifying this stream, usable as a seed elsewhere.
    pub fn seed_value(self) -> u64 {
        self.key
    }

    pub fn rng(self) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut s = self.key;
        for chunk in seed.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}
