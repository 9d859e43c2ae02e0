//! The optimized REESSE1+ signature scheme: key generation, signing,
//! verification, a constraint auditor and a round-trip prober for the
//! ambiguous formulas (see [`InterpretationConfig`]).

mod audit;
mod interp;
mod keyfile;
mod keygen;
mod probe;
mod profile;
mod sign;
mod verify;

pub use audit::{constraint_audit, public_key_audit, AuditEntry, AuditReport};
pub use interp::{
    AlphaLead, ExponentBudget, ExponentModulus, G0Sign, HbarForm, InterpretationConfig,
    LoopPolarity, TPlacement, UExponent, WCondition,
};
pub use keyfile::{parse_key_file, KeyFile};
pub use keygen::{keygen, ExponentReport};
pub use probe::{first_divergence, roundtrip_probe, select_interpretation, ProbeReport, ProbeRow};
pub use profile::{ParameterProfile, ProfileKind};
pub use sign::{sign, sign_digest, sign_with_transcript, SigningTranscript};
pub use verify::{verify, verify_digest, Verification, VerificationTranscript};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bits::{hex_padded, parse_hex, BitString};
use crate::digest::{Digest, DigestError};
use crate::numeric::{mod_inv, CoprimeSequence, FactoredModulus, NumericError};

#[derive(Debug, Error)]
pub enum ReesseError {
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Digest(#[from] DigestError),
    #[error("digest yields {got} bits, the key expects {expected}")]
    DigestLength { expected: usize, got: usize },
    #[error("signing retry budget exhausted after {} candidates for a", .0.outer_iterations)]
    RetryBudget(Box<SigningTranscript>),
    #[error("key generation failed: {0}")]
    Keygen(String),
    #[error("malformed key material: {0}")]
    Format(String),
    #[error("probe precondition: {0}")]
    Probe(String),
}

/// `(σ̄, n, S, T, M)` together with the factorization of `M - 1` and the
/// interpretation the key was generated under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonParams {
    pub sigma: BigUint,
    pub n: usize,
    pub s: BigUint,
    pub t: BigUint,
    pub ctx: FactoredModulus,
    pub interp: InterpretationConfig,
}

impl CommonParams {
    /// `M`.
    pub fn modulus(&self) -> &BigUint {
        self.ctx.modulus()
    }

    /// `M - 1`.
    pub fn order(&self) -> &BigUint {
        self.ctx.order()
    }

    /// Bit length of `M`.
    pub fn m(&self) -> u64 {
        self.ctx.bits()
    }

    /// `S^-1 mod (M-1)`.
    pub fn s_inverse(&self) -> Option<BigUint> {
        mod_inv(&self.s, self.order())
    }
}

/// `({C_i}, α, β)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub c: Vec<BigUint>,
    pub alpha: BigUint,
    pub beta: BigUint,
}

/// `({A_i}, {ℓ(i)}, W, δ, D, d, h̄)`.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub a: CoprimeSequence,
    pub ell: Vec<i64>,
    pub w: BigUint,
    pub delta: BigUint,
    pub big_d: BigUint,
    pub d: BigUint,
    pub h_bar: BigUint,
}

impl std::fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("PrivateKey { .. }")
    }
}

impl Drop for PrivateKey {
    // Best effort: releases the limbs after overwriting the small values.
    fn drop(&mut self) {
        self.ell.iter_mut().for_each(|l| *l = 0);
        for x in [&mut self.w, &mut self.delta, &mut self.h_bar] {
            x.set_zero();
        }
    }
}

/// A signature `(Q, U)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    pub q: BigUint,
    pub u: BigUint,
}

impl Signature {
    /// `Q ‖ U`, each `m` bits wide.
    pub fn pack(&self, m: u64) -> Option<BitString> {
        let q = BitString::from_biguint(&self.q, m as usize).ok()?;
        let u = BitString::from_biguint(&self.u, m as usize).ok()?;
        Some(q.concat(&u))
    }

    pub fn unpack(bits: &BitString, m: u64) -> Option<Self> {
        let m = m as usize;
        if bits.len() != 2 * m {
            return None;
        }
        let s = bits.as_slice();
        Some(Signature {
            q: BitString::new(s[..m].to_vec()).to_biguint(),
            u: BitString::new(s[m..].to_vec()).to_biguint(),
        })
    }

    /// Hex token of the packed form: `Q` then `U`, `ceil(m/4)` digits each.
    pub fn to_hex(&self, m: u64) -> String {
        let w = m.div_ceil(4) as usize;
        format!("{}{}", hex_padded(&self.q, w), hex_padded(&self.u, w))
    }

    pub fn from_hex(s: &str, m: u64) -> Option<Self> {
        let w = m.div_ceil(4) as usize;
        if s.len() != 2 * w || !s.is_ascii() {
            return None;
        }
        Some(Signature { q: parse_hex(&s[..w])?, u: parse_hex(&s[w..])? })
    }

    /// The signature file: `Q` and `U` as hex lines.
    pub fn to_text(&self) -> String {
        format!("{:x}\n{:x}\n", self.q, self.u)
    }

    pub fn from_text(text: &str) -> Result<Self, ReesseError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .and_then(parse_hex)
                .ok_or_else(|| ReesseError::Format(format!("signature file: bad or missing {what}")))
        };
        let q = next("Q")?;
        let u = next("U")?;
        Ok(Signature { q, u })
    }
}

/// Digest of `message` as the bit list `b_1..b_n`.
pub(crate) fn digest_bits(
    hash: &dyn Digest,
    message: &[u8],
    n: usize,
) -> Result<BitString, ReesseError> {
    if hash.output_bits() != n {
        return Err(ReesseError::DigestLength { expected: n, got: hash.output_bits() });
    }
    Ok(hash.digest(message)?)
}

/// Modular arithmetic in `Z_M^*` with exponents reduced modulo `ered`,
/// which is `M - 1` or `M` depending on the interpretation.
pub(crate) struct Arith<'a> {
    pub m: &'a BigUint,
    pub ered: BigUint,
}

impl<'a> Arith<'a> {
    pub fn new(common: &'a CommonParams, interp: &InterpretationConfig) -> Self {
        Self::from_ctx(&common.ctx, interp)
    }

    pub fn from_ctx(ctx: &'a FactoredModulus, interp: &InterpretationConfig) -> Self {
        let ered = match interp.exponent_modulus {
            ExponentModulus::GroupOrder => ctx.order().clone(),
            ExponentModulus::Modulus => ctx.modulus().clone(),
        };
        Arith { m: ctx.modulus(), ered }
    }

    /// Reduces an exponent.
    pub fn e(&self, x: &BigUint) -> BigUint {
        x % &self.ered
    }

    /// Exponent-level power `x^y mod ered`.
    pub fn epow(&self, x: &BigUint, y: &BigUint) -> BigUint {
        x.modpow(y, &self.ered)
    }

    pub fn pow(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        base.modpow(&self.e(exp), self.m)
    }

    pub fn pow_signed(&self, base: &BigUint, exp: i64) -> BigUint {
        let e = BigUint::from(exp.unsigned_abs());
        if exp >= 0 {
            self.pow(base, &e)
        } else {
            self.pow(&self.inv(base), &e)
        }
    }

    pub fn inv(&self, x: &BigUint) -> BigUint {
        mod_inv(x, self.m).unwrap_or_else(BigUint::zero)
    }

    pub fn mul(&self, x: &BigUint, y: &BigUint) -> BigUint {
        x * y % self.m
    }

    pub fn in_range(&self, x: &BigUint) -> bool {
        x > &BigUint::one() && x < self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_packs_to_2m_bits() {
        let sig = Signature { q: BigUint::from(0xabcdu32), u: BigUint::from(0x1234u32) };
        let bits = sig.pack(80).unwrap();
        assert_eq!(bits.len(), 160);
        assert_eq!(Signature::unpack(&bits, 80).unwrap(), sig);
        assert_eq!(sig.to_hex(80).len(), 40);
        assert_eq!(Signature::from_hex(&sig.to_hex(80), 80).unwrap(), sig);
        assert_eq!(Signature::from_text(&sig.to_text()).unwrap(), sig);
        assert!(sig.pack(12).is_none());
    }
}
