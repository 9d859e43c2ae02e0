//! Digest functions feeding the signature scheme. Signing only needs `n`
//! bits per message; where those bits come from is pluggable.

use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::bits::BitString;
use crate::juna::{hash_compress, HashInitValue, JunaError};

#[derive(Debug, Error)]
pub enum DigestError {
    #[error(transparent)]
    Juna(#[from] JunaError),
}

pub trait Digest {
    /// Number of bits produced.
    fn output_bits(&self) -> usize;

    fn digest(&self, message: &[u8]) -> Result<BitString, DigestError>;
}

/// SHA-256 in counter mode, truncated to `bits`.
pub fn sha256_expand(message: &[u8], bits: usize) -> BitString {
    let mut out = Vec::with_capacity(bits.div_ceil(8));
    let mut counter = 0u32;
    while out.len() * 8 < bits {
        let mut h = Sha256::new();
        h.update(counter.to_be_bytes());
        h.update(message);
        out.extend_from_slice(&h.finalize());
        counter += 1;
    }
    BitString::from_bytes(&out, bits)
}

/// Classical digest expanded to `n` bits.
#[derive(Debug, Clone, Copy)]
pub struct Sha256Digest {
    pub bits: usize,
}

impl Digest for Sha256Digest {
    fn output_bits(&self) -> usize {
        self.bits
    }

    fn digest(&self, message: &[u8]) -> Result<BitString, DigestError> {
        Ok(sha256_expand(message, self.bits))
    }
}

/// The message itself, truncated or zero-padded to `bits`. Deterministic and
/// transparent, for unit tests.
#[derive(Debug, Clone, Copy)]
pub struct PaddingDigest {
    pub bits: usize,
}

impl Digest for PaddingDigest {
    fn output_bits(&self) -> usize {
        self.bits
    }

    fn digest(&self, message: &[u8]) -> Result<BitString, DigestError> {
        Ok(BitString::from_bytes(message, self.bits))
    }
}

/// Juna compression over a SHA-256 pre-digest of the message.
///
/// The pre-digest supplies exactly `n` input bits; an all-zero pre-digest
/// gets its last bit set so the input is always admissible.
#[derive(Debug, Clone)]
pub struct JunaDigest {
    iv: HashInitValue,
}

impl JunaDigest {
    pub fn new(iv: HashInitValue) -> Self {
        JunaDigest { iv }
    }

    pub fn iv(&self) -> &HashInitValue {
        &self.iv
    }
}

impl Digest for JunaDigest {
    fn output_bits(&self) -> usize {
        self.iv.m() as usize
    }

    fn digest(&self, message: &[u8]) -> Result<BitString, DigestError> {
        let mut pre = sha256_expand(message, self.iv.n());
        if pre.is_zero() {
            let last = pre.len() - 1;
            pre.flip(last);
        }
        let d = hash_compress(&self.iv, &pre)?;
        Ok(BitString::from_biguint(&d, self.iv.m() as usize).expect("digest below modulus"))
    }
}
