//! XTEA block cipher (64-bit block, 128-bit key), 32 cycles by default.

const DELTA: u32 = 0x9E37_79B9;

#[derive(Clone)]
pub struct Xtea {
    key: [u32; 4],
    cycles: u32,
}

impl Xtea {
    pub fn new(key: [u32; 4], cycles: u32) -> Self {
        Self { key, cycles }
    }

    pub fn encrypt(&self, block: u64) -> u64 {
        let k = &self.key;
        let mut v0 = (block >> 32) as u32;
        let mut v1 = block as u32;
        let mut sum: u32 = 0;
        for _ in 0..self.cycles {
            v0 = v0.wrapping_add(
                (((v1 << 4) ^ (v1 >> 5)).wrapping_add(v1))
                    ^ sum.wrapping_add(k[(sum & 3) as usize]),
            );
            sum = sum.wrapping_add(DELTA);
            v1 = v1.wrapping_add(
                (((v0 << 4) ^ (v0 >> 5)).wrapping_add(v0))
                    ^ sum.wrapping_add(k[((sum >> 11) & 3) as usize]),
            );
        }
        ((v0 as u64) << 32) | v1 as u64
    }

    pub fn decrypt(&self, block: u64) -> u64 {
        let k = &self.key;
        let mut v0 = (block >> 32) as u32;
        let mut v1 = block as u32;
        let mut sum: u32 = DELTA.wrapping_mul(self.cycles);
        for _ in 0..self.cycles {
            v1 = v1.wrapping_sub(
                (((v0 << 4) ^ (v0 >> 5)).wrapping_add(v0))
                    ^ sum.wrapping_add(k[((sum >> 11) & 3) as usize]),
            );
            sum = sum.wrapping_sub(DELTA);
            v0 = v0.wrapping_sub(
                (((v1 << 4) ^ (v1 >> 5)).wrapping_add(v1))
                    ^ sum.wrapping_add(k[(sum & 3) as usize]),
            );
        }
        ((v0 as u64) << 32) | v1 as u64
    }
}
