//! TEA block cipher (64-bit block, 128-bit key).
//!
//! One cycle is a pair of Feistel rounds; the standard parameterization is
//! 32 cycles.

const DELTA: u32 = 0x9E37_79B9;

#[derive(Clone)]
pub struct Tea {
    key: [u32; 4],
    cycles: u32,
}

impl Tea {
    pub fn new(key: [u32; 4], cycles: u32) -> Self {
        Self { key, cycles }
    }

    pub fn encrypt(&self, block: u64) -> u64 {
        let [k0, k1, k2, k3] = self.key;
        let mut v0 = (block >> 32) as u32;
        let mut v1 = block as u32;
        let mut sum: u32 = 0;
        for _ in 0..self.cycles {
            sum = sum.wrapping_add(DELTA);
            v0 = v0.wrapping_add(
                (v1 << 4).wrapping_add(k0) ^ v1.wrapping_add(sum) ^ (v1 >> 5).wrapping_add(k1),
            );
            v1 = v1.wrapping_add(
                (v0 << 4).wrapping_add(k2) ^ v0.wrapping_add(sum) ^ (v0 >> 5).wrapping_add(k3),
            );
        }
        ((v0 as u64) << 32) | v1 as u64
    }

    pub fn decrypt(&self, block: u64) -> u64 {
        let [k0, k1, k2, k3] = self.key;
        let mut v0 = (block >> 32) as u32;
        let mut v1 = block as u32;
        let mut sum: u32 = DELTA.wrapping_mul(self.cycles);
        for _ in 0..self.cycles {
            v1 = v1.wrapping_sub(
                (v0 << 4).wrapping_add(k2) ^ v0.wrapping_add(sum) ^ (v0 >> 5).wrapping_add(k3),
            );
            v0 = v0.wrapping_sub(
                (v1 << 4).wrapping_add(k0) ^ v1.wrapping_add(sum) ^ (v1 >> 5).wrapping_add(k1),
            );
            sum = sum.wrapping_sub(DELTA);
        }
        ((v0 as u64) << 32) | v1 as u64
    }
}
