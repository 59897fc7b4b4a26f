//! Block-cipher modes of operation as iterated dynamical systems.
//!
//! Feeding each ciphertext back into a mode of operation turns a cipher plus
//! mode into a self-map on `b·n` boolean cells. This crate measures how a
//! single flipped plaintext bit propagates under that map, counting every
//! propagation pathway exactly, and derives a divergence-rate curve `λ(t)`
//! whose shape is characteristic of the mode and of the cipher's block size,
//! but not of the particular cipher. The curves feed ensemble statistics and
//! a nearest-profile classifier for modes and block-size families.
//!
//! Module map:
//! - [`bits`], [`cipher`], [`kat`]: bit blocks, the cipher suite (TEA, XTEA,
//!   AES-128, toys), known-answer tests.
//! - [`mode`]: the six modes (ECB, CBC, OFB, CFB, CTR, PCBC) as single-pass
//!   maps and iterated systems.
//! - [`lyapunov`]: the defect-propagation engine and its brute-force oracle.
//! - [`ensemble`]: reproducible datasets, ensemble runs, paired t-tests,
//!   envelopes, block-count regression.
//! - [`classify`]: per-mode reference profiles and nearest-profile verdicts.
//! - [`svg`]: dependency-free SVG rendering of normalized curves.

pub mod bits;
pub mod cipher;
pub mod classify;
pub mod ensemble;
pub mod error;
pub mod kat;
pub mod lyapunov;
pub mod mode;
pub mod svg;

pub use bits::BitBlock;
pub use cipher::{Cipher, CipherId, CipherSpec, Key, ToyKind};
pub use error::{Error, Result};
pub use mode::{ModeContext, ModeId, SystemState};
