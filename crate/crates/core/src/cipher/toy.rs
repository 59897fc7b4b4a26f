//! Deliberately weak toy ciphers on 4..=16 bit blocks.
//!
//! Their full truth tables are enumerable, which is what makes exact
//! brute-force oracles for the defect engine possible. The XOR kind is
//! linear over GF(2); the fixed-permutation kind is a random bijection on
//! `{0,1}^n` drawn by seeding a deterministic generator with the key.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Clone)]
pub struct ToyXor {
    key: u16,
    width: u32,
}

impl ToyXor {
    pub fn new(key: u16, width: u32) -> Self {
        debug_assert!((4..=16).contains(&width));
        Self { key, width }
    }

    #[inline]
    pub fn apply(&self, block: u16) -> u16 {
        debug_assert_eq!(block >> self.width, 0);
        block ^ self.key
    }
}

#[derive(Clone)]
pub struct ToyPerm {
    table: Vec<u16>,
    inverse: Vec<u16>,
}

impl ToyPerm {
    /// Fisher-Yates shuffle of the identity map, seeded by the 64-bit key.
    pub fn new(seed: u64, width: u32) -> Self {
        debug_assert!((4..=16).contains(&width));
        let size = 1usize << width;
        let mut table: Vec<u16> = (0..size as u32).map(|v| v as u16).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        table.shuffle(&mut rng);
        let mut inverse = vec![0u16; size];
        for (input, &output) in table.iter().enumerate() {
            inverse[output as usize] = input as u16;
        }
        Self { table, inverse }
    }

    #[inline]
    pub fn encrypt(&self, block: u16) -> u16 {
        self.table[block as usize]
    }

    #[inline]
    pub fn decrypt(&self, block: u16) -> u16 {
        self.inverse[block as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn xor_matches_definition() {
        let c = ToyXor::new(0b1010, 4);
        assert_eq!(c.apply(0b0011), 0b1001);
        // self-inverse
        assert_eq!(c.apply(0b1001), 0b0011);
    }

    #[test]
    fn xor_is_linear() {
        let c = ToyXor::new(0xa5, 8);
        for x in 0..=255u16 {
            for y in [0u16, 1, 17, 255] {
                assert_eq!(c.apply(x) ^ c.apply(y), x ^ y);
            }
        }
    }

    #[test]
    fn permutation_is_a_bijection() {
        for seed in [0u64, 1, 42, 0xdead_beef] {
            let c = ToyPerm::new(seed, 4);
            let image: HashSet<u16> = (0..16).map(|v| c.encrypt(v)).collect();
            assert_eq!(image.len(), 16);
            for v in 0..16 {
                assert_eq!(c.decrypt(c.encrypt(v)), v);
            }
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = ToyPerm::new(1, 8);
        let b = ToyPerm::new(2, 8);
        assert!((0..256u16).any(|v| a.encrypt(v) != b.encrypt(v)));
    }
}
