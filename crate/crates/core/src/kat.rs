//! Known-answer-test harness.
//!
//! File format: one record per line,
//! `cipher_id,rounds,key_hex,plaintext_hex,ciphertext_hex`.
//! Blank lines and `#` comments are skipped.

use std::str::FromStr;

use crate::bits::BitBlock;
use crate::cipher::{decrypt_block, encrypt_block, CipherId, CipherSpec, Key};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct KatRecord {
    pub line: usize,
    pub spec: CipherSpec,
    pub key: Key,
    pub plaintext: BitBlock,
    pub ciphertext: BitBlock,
}

#[derive(Clone, Debug)]
pub struct KatFailure {
    pub line: usize,
    pub cipher: CipherId,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct KatReport {
    pub total: usize,
    pub failures: Vec<KatFailure>,
}

impl KatReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn parse_kat_file(text: &str) -> Result<Vec<KatRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line,
                message: format!("expected 5 comma-separated fields, got {}", fields.len()),
            });
        }
        fn at_line<T>(res: Result<T>, line: usize, what: &str) -> Result<T> {
            res.map_err(|e| Error::Parse {
                line,
                message: format!("{what}: {e}"),
            })
        }
        let id = at_line(CipherId::from_str(fields[0]), line, "cipher id")?;
        let rounds: u32 = fields[1].parse().map_err(|e| Error::Parse {
            line,
            message: format!("rounds: {e}"),
        })?;
        let spec = CipherSpec::by_id(id).with_rounds(rounds);
        let key = at_line(Key::from_hex(fields[2], spec.key_bits), line, "key")?;
        let plaintext = at_line(
            BitBlock::from_hex(fields[3], spec.block_bits),
            line,
            "plaintext",
        )?;
        let ciphertext = at_line(
            BitBlock::from_hex(fields[4], spec.block_bits),
            line,
            "ciphertext",
        )?;
        records.push(KatRecord {
            line,
            spec,
            key,
            plaintext,
            ciphertext,
        });
    }
    Ok(records)
}

/// Checks every record in both directions: `E_K(P) = C` and `D_K(C) = P`.
pub fn verify_records(records: &[KatRecord]) -> KatReport {
    let mut report = KatReport {
        total: records.len(),
        failures: Vec::new(),
    };
    for rec in records {
        match encrypt_block(&rec.spec, &rec.key, rec.plaintext) {
            Ok(ct) if ct == rec.ciphertext => {}
            Ok(ct) => {
                report.failures.push(KatFailure {
                    line: rec.line,
                    cipher: rec.spec.id,
                    reason: format!("encrypt: got {ct}, expected {}", rec.ciphertext),
                });
                continue;
            }
            Err(e) => {
                report.failures.push(KatFailure {
                    line: rec.line,
                    cipher: rec.spec.id,
                    reason: format!("encrypt failed: {e}"),
                });
                continue;
            }
        }
        match decrypt_block(&rec.spec, &rec.key, rec.ciphertext) {
            Ok(pt) if pt == rec.plaintext => {}
            Ok(pt) => report.failures.push(KatFailure {
                line: rec.line,
                cipher: rec.spec.id,
                reason: format!("decrypt: got {pt}, expected {}", rec.plaintext),
            }),
            Err(e) => report.failures.push(KatFailure {
                line: rec.line,
                cipher: rec.spec.id,
                reason: format!("decrypt failed: {e}"),
            }),
        }
    }
    report
}

pub fn run_kat(text: &str) -> Result<KatReport> {
    Ok(verify_records(&parse_kat_file(text)?))
}
