//! Block-cipher abstraction and the bundled implementations.
//!
//! TEA and XTEA cover the 64-bit family, AES-128 the 128-bit family; the toy
//! ciphers exist so that defect propagation can be checked against exact
//! brute-force enumeration. Further ciphers plug in as new [`CipherId`]
//! variants behind the same [`CipherSpec`] surface.

mod aes;
mod tea;
mod toy;
mod xtea;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{mask, BitBlock};
use crate::error::{Error, Result};

pub use aes::Aes128;
pub use tea::Tea;
pub use toy::{ToyPerm, ToyXor};
pub use xtea::Xtea;

/// Closed enumeration of implemented ciphers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CipherId {
    Tea,
    Xtea,
    Aes128,
    ToyXor,
    ToyPerm,
}

impl CipherId {
    pub fn as_str(self) -> &'static str {
        match self {
            CipherId::Tea => "tea",
            CipherId::Xtea => "xtea",
            CipherId::Aes128 => "aes128",
            CipherId::ToyXor => "toy-xor",
            CipherId::ToyPerm => "toy-perm",
        }
    }
}

impl fmt::Display for CipherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CipherId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tea" => Ok(CipherId::Tea),
            "xtea" => Ok(CipherId::Xtea),
            "aes128" | "aes" => Ok(CipherId::Aes128),
            "toy-xor" => Ok(CipherId::ToyXor),
            "toy-perm" => Ok(CipherId::ToyPerm),
            other => Err(Error::UnsupportedCipher(other.to_string())),
        }
    }
}

/// Cipher identity plus its structural parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherSpec {
    pub id: CipherId,
    pub block_bits: u32,
    pub key_bits: u32,
    pub rounds: u32,
}

impl CipherSpec {
    /// TEA at the standard 32 cycles.
    pub fn tea() -> Self {
        Self {
            id: CipherId::Tea,
            block_bits: 64,
            key_bits: 128,
            rounds: 32,
        }
    }

    /// XTEA at the standard 32 cycles.
    pub fn xtea() -> Self {
        Self {
            id: CipherId::Xtea,
            block_bits: 64,
            key_bits: 128,
            rounds: 32,
        }
    }

    /// AES-128 at the standard 10 rounds.
    pub fn aes128() -> Self {
        Self {
            id: CipherId::Aes128,
            block_bits: 128,
            key_bits: 128,
            rounds: 10,
        }
    }

    /// Default spec for a cipher id (toy widths default to 4 bits).
    pub fn by_id(id: CipherId) -> Self {
        match id {
            CipherId::Tea => Self::tea(),
            CipherId::Xtea => Self::xtea(),
            CipherId::Aes128 => Self::aes128(),
            CipherId::ToyXor => toy_cipher(ToyKind::Xor, 4).expect("valid width"),
            CipherId::ToyPerm => toy_cipher(ToyKind::FixedPermutation, 4).expect("valid width"),
        }
    }

    pub fn with_rounds(mut self, rounds: u32) -> Self {
        self.rounds = rounds;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::InvalidParameter("rounds must be positive".into()));
        }
        let expect = |cond: bool, msg: &str| {
            if cond {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{msg} (got {self:?})")))
            }
        };
        match self.id {
            CipherId::Tea | CipherId::Xtea => expect(
                self.block_bits == 64 && self.key_bits == 128,
                "TEA/XTEA need n=64, k=128",
            ),
            CipherId::Aes128 => expect(
                self.block_bits == 128 && self.key_bits == 128,
                "AES-128 needs n=k=128",
            ),
            CipherId::ToyXor => expect(
                (4..=16).contains(&self.block_bits) && self.key_bits == self.block_bits,
                "toy XOR needs 4 <= n <= 16 and k = n",
            ),
            CipherId::ToyPerm => expect(
                (4..=16).contains(&self.block_bits) && self.key_bits == 64,
                "toy permutation needs 4 <= n <= 16 and k = 64",
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToyKind {
    Xor,
    FixedPermutation,
}

/// Spec for a toy cipher of the given kind and block width.
///
/// The XOR kind takes an `n`-bit key with `E_K(x) = x ^ K`; the
/// fixed-permutation kind takes a 64-bit key whose value seeds the bijection.
pub fn toy_cipher(kind: ToyKind, n: u32) -> Result<CipherSpec> {
    if !(4..=16).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "toy width {n} out of [4, 16]"
        )));
    }
    Ok(match kind {
        ToyKind::Xor => CipherSpec {
            id: CipherId::ToyXor,
            block_bits: n,
            key_bits: n,
            rounds: 1,
        },
        ToyKind::FixedPermutation => CipherSpec {
            id: CipherId::ToyPerm,
            block_bits: n,
            key_bits: 64,
            rounds: 1,
        },
    })
}

/// A `k`-bit key.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Key {
    value: u128,
    width: u32,
}

impl Key {
    pub fn new(value: u128, width: u32) -> Result<Self> {
        if !(1..=128).contains(&width) {
            return Err(Error::InvalidParameter(format!(
                "key width {width} out of range"
            )));
        }
        if width < 128 && value >> width != 0 {
            return Err(Error::InvalidParameter(format!(
                "key value {value:#x} does not fit in {width} bits"
            )));
        }
        Ok(Self { value, width })
    }

    pub fn from_hex(s: &str, width: u32) -> Result<Self> {
        let block = BitBlock::from_hex(s, width)?;
        Ok(Self {
            value: block.value(),
            width,
        })
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

    pub fn to_hex(self) -> String {
        format!("{:0>1$x}", self.value, (self.width / 4) as usize)
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Key({:0>1$x})",
            self.value,
            (self.width as usize).div_ceil(4)
        )
    }
}

/// A keyed cipher instance. Immutable after construction; encrypt/decrypt are
/// pure and safe to call from any number of workers.
#[derive(Clone)]
pub enum Cipher {
    Tea(Tea),
    Xtea(Xtea),
    Aes128(Aes128),
    ToyXor(ToyXor),
    ToyPerm(ToyPerm),
}

impl Cipher {
    pub fn new(spec: &CipherSpec, key: &Key) -> Result<Self> {
        spec.validate()?;
        if key.width() != spec.key_bits {
            return Err(Error::Dimension(format!(
                "key width {} does not match spec key_bits {}",
                key.width(),
                spec.key_bits
            )));
        }
        Ok(match spec.id {
            CipherId::Tea => Cipher::Tea(Tea::new(key_words(key.value()), spec.rounds)),
            CipherId::Xtea => Cipher::Xtea(Xtea::new(key_words(key.value()), spec.rounds)),
            CipherId::Aes128 => Cipher::Aes128(Aes128::new(key.value().to_be_bytes(), spec.rounds)),
            CipherId::ToyXor => Cipher::ToyXor(ToyXor::new(key.value() as u16, spec.block_bits)),
            CipherId::ToyPerm => Cipher::ToyPerm(ToyPerm::new(key.value() as u64, spec.block_bits)),
        })
    }

    pub fn encrypt(&self, block: BitBlock) -> BitBlock {
        let n = block.width();
        match self {
            Cipher::Tea(c) => BitBlock::new(c.encrypt(block.value() as u64) as u128, n),
            Cipher::Xtea(c) => BitBlock::new(c.encrypt(block.value() as u64) as u128, n),
            Cipher::Aes128(c) => BitBlock::new(
                u128::from_be_bytes(c.encrypt(block.value().to_be_bytes())),
                n,
            ),
            Cipher::ToyXor(c) => BitBlock::new(c.apply(block.value() as u16) as u128, n),
            Cipher::ToyPerm(c) => BitBlock::new(c.encrypt(block.value() as u16) as u128, n),
        }
        .expect("cipher output fits the block width")
    }

    pub fn decrypt(&self, block: BitBlock) -> BitBlock {
        let n = block.width();
        match self {
            Cipher::Tea(c) => BitBlock::new(c.decrypt(block.value() as u64) as u128, n),
            Cipher::Xtea(c) => BitBlock::new(c.decrypt(block.value() as u64) as u128, n),
            Cipher::Aes128(c) => BitBlock::new(
                u128::from_be_bytes(c.decrypt(block.value().to_be_bytes())),
                n,
            ),
            Cipher::ToyXor(c) => BitBlock::new(c.apply(block.value() as u16) as u128, n),
            Cipher::ToyPerm(c) => BitBlock::new(c.decrypt(block.value() as u16) as u128, n),
        }
        .expect("cipher output fits the block width")
    }
}

fn key_words(value: u128) -> [u32; 4] {
    [
        (value >> 96) as u32,
        (value >> 64) as u32,
        (value >> 32) as u32,
        value as u32,
    ]
}

fn check_block(spec: &CipherSpec, block: BitBlock) -> Result<()> {
    if block.width() != spec.block_bits {
        return Err(Error::Dimension(format!(
            "block width {} does not match spec block_bits {}",
            block.width(),
            spec.block_bits
        )));
    }
    Ok(())
}

/// `E_K(block)`. Builds the key schedule on every call; hot paths should hold
/// a [`Cipher`] instead.
pub fn encrypt_block(spec: &CipherSpec, key: &Key, block: BitBlock) -> Result<BitBlock> {
    check_block(spec, block)?;
    Ok(Cipher::new(spec, key)?.encrypt(block))
}

/// `E_K^{-1}(block)`; inverse of [`encrypt_block`].
pub fn decrypt_block(spec: &CipherSpec, key: &Key, block: BitBlock) -> Result<BitBlock> {
    check_block(spec, block)?;
    Ok(Cipher::new(spec, key)?.decrypt(block))
}

/// Published weak keys to reject during dataset generation. None of the
/// bundled ciphers has a canonical list; a DES plug-in would register its
/// four weak keys here.
pub fn registered_weak_keys(id: CipherId) -> &'static [u128] {
    match id {
        CipherId::Tea
        | CipherId::Xtea
        | CipherId::Aes128
        | CipherId::ToyXor
        | CipherId::ToyPerm => &[],
    }
}

/// Mean fraction of output bits flipped by single-bit input flips, over
/// `trials` random (input, bit) pairs.
pub fn avalanche_fraction<R: Rng + ?Sized>(
    cipher: &Cipher,
    n: u32,
    rng: &mut R,
    trials: u32,
) -> f64 {
    let mut flipped = 0u64;
    for _ in 0..trials {
        let input = BitBlock::random(rng, n);
        let bit = rng.random_range(1..=n);
        let a = cipher.encrypt(input);
        let b = cipher.encrypt(input.flip_bit(bit));
        flipped += a.hamming(b) as u64;
    }
    flipped as f64 / (trials as u64 * n as u64) as f64
}
