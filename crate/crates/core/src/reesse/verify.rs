use num_bigint::BigUint;
use num_traits::One;

use super::{
    digest_bits, Arith, CommonParams, InterpretationConfig, PublicKey, ReesseError, Signature,
    UExponent,
};
use crate::bits::BitString;
use crate::digest::Digest;

/// Values recomputed by the verifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationTranscript {
    pub h: BigUint,
    pub bits: BitString,
    /// `∏ C_i^b_i`.
    pub g1_bar: BigUint,
    /// First factor of `X`.
    pub x1: BigUint,
    pub x: BigUint,
    /// First factor of `Y`.
    pub y1: BigUint,
    pub y: BigUint,
}

/// Outcome of [`verify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub accepted: bool,
    /// Why the signature was rejected before or after computing `X` and `Y`.
    pub reason: Option<String>,
    /// Absent when the range check failed.
    pub transcript: Option<VerificationTranscript>,
}

impl Verification {
    fn range_reject(reason: String) -> Self {
        Verification { accepted: false, reason: Some(reason), transcript: None }
    }
}

/// Checks `X = Y`. A pure function of its inputs.
pub fn verify(
    public: &PublicKey,
    common: &CommonParams,
    message: &[u8],
    sig: &Signature,
    hash: &dyn Digest,
    interp: &InterpretationConfig,
) -> Result<Verification, ReesseError> {
    let bits = digest_bits(hash, message, common.n)?;
    verify_digest(public, common, &bits, sig, interp)
}

/// Verifies against a digest `b_1..b_n` directly.
pub fn verify_digest(
    public: &PublicKey,
    common: &CommonParams,
    bits: &BitString,
    sig: &Signature,
    interp: &InterpretationConfig,
) -> Result<Verification, ReesseError> {
    if bits.len() != common.n {
        return Err(ReesseError::DigestLength { expected: common.n, got: bits.len() });
    }
    let ar = Arith::new(common, interp);
    if !ar.in_range(&sig.q) {
        return Ok(Verification::range_reject(format!("Q = {:x} outside (1, M)", sig.q)));
    }
    if !ar.in_range(&sig.u) {
        return Ok(Verification::range_reject(format!("U = {:x} outside (1, M)", sig.u)));
    }
    if public.c.len() != common.n {
        return Err(ReesseError::Format(format!(
            "public key has {} entries, expected {}",
            public.c.len(),
            common.n
        )));
    }
    let h = bits.to_biguint();
    let bits = bits.clone();
    let (q, u) = (&sig.q, &sig.u);

    let g1_bar = public
        .c
        .iter()
        .zip(bits.iter())
        .filter(|(_, b)| *b)
        .fold(BigUint::one(), |acc, (c, _)| ar.mul(&acc, c));

    let x_exp = match interp.u_exponent {
        UExponent::Power => q * ar.epow(u, &common.t),
        UExponent::Product => q * u * &common.t,
    };
    let x1 = ar.pow(&ar.mul(&public.alpha, &ar.inv(q)), &x_exp);
    let x = ar.mul(&x1, &ar.pow(&public.alpha, &ar.epow(q, &common.sigma)));

    let y1 = ar.pow(&ar.mul(&ar.pow(&g1_bar, q), &ar.inv(u)), &(u * &common.s * &common.t));
    let beta_exp = &h * ar.epow(q, &(&common.sigma - 1u32)) + ar.epow(&h, &common.sigma);
    let y = ar.mul(&y1, &ar.pow(&public.beta, &beta_exp));

    let accepted = x == y;
    Ok(Verification {
        accepted,
        reason: (!accepted).then(|| "X != Y".to_string()),
        transcript: Some(VerificationTranscript { h, bits, g1_bar, x1, x, y1, y }),
    })
}
