//! Fixed-width bit blocks.
//!
//! A [`BitBlock`] is the unit a block cipher encrypts: an `n`-bit sequence in
//! most-significant-bit-first order, stored in the low `n` bits of a `u128`.
//! Bit index 1 is the most significant bit, bit index `n` the least
//! significant; cell indexing across a multi-block state flattens `(block,
//! bit)` pairs row-major.

use std::fmt;
use std::ops::BitXor;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n`-bit block, `1 <= n <= 128`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitBlock {
    value: u128,
    width: u32,
}

impl BitBlock {
    pub const MAX_WIDTH: u32 = 128;

    /// All-zero block of the given width.
    pub fn zero(width: u32) -> Self {
        assert!(
            (1..=Self::MAX_WIDTH).contains(&width),
            "bad block width {width}"
        );
        Self { value: 0, width }
    }

    /// Block from an integer value; fails if the value does not fit in `width` bits.
    pub fn new(value: u128, width: u32) -> Result<Self> {
        if !(1..=Self::MAX_WIDTH).contains(&width) {
            return Err(Error::InvalidParameter(format!(
                "block width {width} out of range"
            )));
        }
        if width < 128 && value >> width != 0 {
            return Err(Error::InvalidParameter(format!(
                "value {value:#x} does not fit in {width} bits"
            )));
        }
        Ok(Self { value, width })
    }

    /// Block from a hex string; the width must be a multiple of 4 and match
    /// the string length.
    pub fn from_hex(s: &str, width: u32) -> Result<Self> {
        if !width.is_multiple_of(4) || s.len() as u32 != width / 4 {
            return Err(Error::Hex(format!(
                "expected {} hex digits for a {width}-bit block, got {:?}",
                width / 4,
                s
            )));
        }
        let value = u128::from_str_radix(s, 16).map_err(|e| Error::Hex(format!("{s:?}: {e}")))?;
        Self::new(value, width)
    }

    /// Block from a binary string such as `"1010"`; handy for narrow toy widths.
    pub fn from_bin(s: &str) -> Result<Self> {
        let width = s.len() as u32;
        if !(1..=Self::MAX_WIDTH).contains(&width) {
            return Err(Error::InvalidParameter(format!(
                "bit-string length {width} out of range"
            )));
        }
        let value = u128::from_str_radix(s, 2)
            .map_err(|e| Error::InvalidParameter(format!("bit string {s:?}: {e}")))?;
        Self::new(value, width)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, width: u32) -> Self {
        let value: u128 = rng.random();
        Self {
            value: value & mask(width),
            width,
        }
    }

    #[inline]
    pub fn value(self) -> u128 {
        self.value
    }

    #[inline]
    pub fn width(self) -> u32 {
        self.width
    }

    /// The bit at 1-based index `i` counted from the most significant end.
    pub fn bit(self, i: u32) -> bool {
        assert!(
            (1..=self.width).contains(&i),
            "bit index {i} out of [1, {}]",
            self.width
        );
        self.value >> (self.width - i) & 1 == 1
    }

    /// Complement the bit at 1-based index `i` (MSB-first). Involutive.
    pub fn flip_bit(self, i: u32) -> Self {
        assert!(
            (1..=self.width).contains(&i),
            "bit index {i} out of [1, {}]",
            self.width
        );
        Self {
            value: self.value ^ (1 << (self.width - i)),
            width: self.width,
        }
    }

    /// Complement the bit at 0-based offset from the MSB.
    #[inline]
    pub fn flip_offset(self, offset: u32) -> Self {
        debug_assert!(offset < self.width);
        Self {
            value: self.value ^ (1 << (self.width - 1 - offset)),
            width: self.width,
        }
    }

    /// Number of positions at which `self` and `other` differ.
    #[inline]
    pub fn hamming(self, other: Self) -> u32 {
        debug_assert_eq!(self.width, other.width);
        (self.value ^ other.value).count_ones()
    }

    /// Addition modulo `2^width`; the counter-mode increment.
    #[inline]
    pub fn wrapping_add(self, rhs: u128) -> Self {
        Self {
            value: self.value.wrapping_add(rhs) & mask(self.width),
            width: self.width,
        }
    }

    /// Hex rendering (width must be a multiple of 4), zero-padded.
    pub fn to_hex(self) -> String {
        debug_assert_eq!(
            self.width % 4,
            0,
            "hex rendering needs a multiple-of-4 width"
        );
        format!("{:0>1$x}", self.value, (self.width / 4) as usize)
    }
}

#[inline]
pub(crate) fn mask(width: u32) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl BitXor for BitBlock {
    type Output = BitBlock;

    #[inline]
    fn bitxor(self, rhs: Self) -> Self {
        assert_eq!(self.width, rhs.width, "xor of mismatched widths");
        Self {
            value: self.value ^ rhs.value,
            width: self.width,
        }
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width.is_multiple_of(4) {
            write!(f, "BitBlock({}, n={})", self.to_hex(), self.width)
        } else {
            write!(f, "BitBlock({:0>1$b})", self.value, self.width as usize)
        }
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width.is_multiple_of(4) {
            write!(f, "{}", self.to_hex())
        } else {
            write!(f, "{:0>1$b}", self.value, self.width as usize)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hex_roundtrip() {
        let b = BitBlock::from_hex("3243f6a8885a308d313198a2e0370734", 128).unwrap();
        assert_eq!(b.to_hex(), "3243f6a8885a308d313198a2e0370734");
        let b = BitBlock::from_hex("0000000000000000", 64).unwrap();
        assert_eq!(b, BitBlock::zero(64));
    }

    #[test]
    fn bin_parsing() {
        let b = BitBlock::from_bin("1010").unwrap();
        assert_eq!(b.value(), 0b1010);
        assert_eq!(b.width(), 4);
        assert!(b.bit(1));
        assert!(!b.bit(2));
    }

    #[test]
    fn msb_first_indexing() {
        // bit 1 is the MSB, bit n the LSB
        let b = BitBlock::from_bin("0001").unwrap();
        assert!(!b.bit(1));
        assert!(b.bit(4));
        assert_eq!(BitBlock::zero(4).flip_bit(4), b);
    }

    #[test]
    fn width_validation() {
        assert!(BitBlock::new(16, 4).is_err());
        assert!(BitBlock::from_hex("abc", 16).is_err());
        assert!(BitBlock::from_hex("zz", 8).is_err());
    }

    #[test]
    fn counter_wraparound() {
        let b = BitBlock::from_bin("1111").unwrap();
        assert_eq!(b.wrapping_add(1), BitBlock::zero(4));
    }

    proptest! {
        #[test]
        fn xor_self_is_zero(v in any::<u128>(), w in 1u32..=128) {
            let b = BitBlock { value: v & mask(w), width: w };
            prop_assert_eq!(b ^ b, BitBlock::zero(w));
        }

        #[test]
        fn flip_is_involutive(v in any::<u128>(), w in 1u32..=128, i in 1u32..=128) {
            let i = (i - 1) % w + 1;
            let b = BitBlock { value: v & mask(w), width: w };
            prop_assert_eq!(b.flip_bit(i).flip_bit(i), b);
            prop_assert_eq!(b.hamming(b.flip_bit(i)), 1);
        }
    }
}
