//! Seeded random streams.
//!
//! A stream is addressed by `(seed, trial, entry)`. Two streams with different
//! addresses are independent ChaCha8 keystreams, so workers can generate cells
//! in any order and still reproduce the same matrix.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Clone, Debug)]
pub struct RandomStream {
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, trial: u64, entry: u64) -> Self {
        let mut key = [0u8; 32];
        let a = splitmix(seed);
        let b = splitmix(a ^ trial.rotate_left(17));
        let c = splitmix(b ^ 0x656c_6c69_7073_6521);
        let d = splitmix(c ^ seed.rotate_left(41) ^ trial);
        key[..8].copy_from_slice(&a.to_le_bytes());
        key[8..16].copy_from_slice(&b.to_le_bytes());
        key[16..24].copy_from_slice(&c.to_le_bytes());
        key[24..].copy_from_slice(&d.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(entry);
        Self { inner }
    }

    /// Stream for a single (seed, trial) when no finer addressing is needed.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        Self::new(seed, trial, u64::MAX)
    }

    /// Derive an independent seed for a named sub-experiment.
    pub fn derive_seed(seed: u64, tag: &str) -> u64 {
        tag.bytes().fold(splitmix(seed), |h, b| splitmix(h ^ u64::from(b)))
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_address_same_stream() {
        let mut a = RandomStream::new(7, 3, 11);
        let mut b = RandomStream::new(7, 3, 11);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn neighbouring_addresses_differ() {
        let x: u64 = RandomStream::new(7, 3, 11).random();
        assert_ne!(x, RandomStream::new(7, 3, 12).random::<u64>());
        assert_ne!(x, RandomStream::new(7, 4, 11).random::<u64>());
        assert_ne!(x, RandomStream::new(8, 3, 11).random::<u64>());
    }
}
