use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use super::{
    digest_bits, Arith, CommonParams, G0Sign, InterpretationConfig, LoopPolarity, PrivateKey,
    ReesseError, Signature,
};
use crate::bits::BitString;
use crate::digest::Digest;
use crate::numeric::{geom_sum, mod_inv, random_range};

pub(crate) const OUTER_BUDGET: u64 = 10_000;

/// Every intermediate value of one signing run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SigningTranscript {
    /// The digest `H`.
    pub h: BigUint,
    pub bits: BitString,
    pub k_bar: BigUint,
    pub g0: BigUint,
    pub a_bar: BigUint,
    pub q: BigUint,
    /// `R`.
    pub big_r: BigUint,
    pub u_bar: BigUint,
    pub g_bar: BigUint,
    pub xi: BigUint,
    /// The retry counter value `r`.
    pub r: u64,
    pub u: BigUint,
    /// Candidates `ā` drawn, including the accepted one.
    pub outer_iterations: u64,
    /// Values of `r` drawn across all candidates.
    pub inner_draws: u64,
}

impl SigningTranscript {
    pub fn signature(&self) -> Signature {
        Signature { q: self.q.clone(), u: self.u.clone() }
    }

    /// `((WQ)^(σ̄-1) + ξ̄ + rUS) mod (M-1)`, the loop expression.
    pub(crate) fn loop_expression(&self, w: &BigUint, common: &CommonParams) -> BigUint {
        let ord = common.order();
        let wq = w * &self.q % ord;
        let rus = self.rus(common);
        (wq.modpow(&(&common.sigma - 1u32), ord) + &self.xi + rus) % ord
    }

    /// `r·U·S mod (M-1)`.
    pub(crate) fn rus(&self, common: &CommonParams) -> BigUint {
        BigUint::from(self.r) * &self.u * &common.s % common.order()
    }

    /// Side conditions of the accepted candidates.
    pub fn side_conditions(&self, private: &PrivateKey, common: &CommonParams) -> Vec<(String, bool)> {
        let ord = common.order();
        let d = &private.d;
        let dt = d * &common.t;
        let s5 = (self.rus(common) + &self.xi) % ord;
        let e = self.loop_expression(&private.w, common);
        let exit = match common.interp.loop_polarity {
            LoopPolarity::AsPrinted => (&e % d).is_zero(),
            LoopPolarity::Inverted => !(&e % d).is_zero(),
        };
        vec![
            ("a_bar in (1, M-1)".into(), self.a_bar > BigUint::one() && &self.a_bar < ord),
            ("dT does not divide a_bar".into(), !(&self.a_bar % &dt).is_zero()),
            ("d does not divide WQ mod (M-1)".into(), !((&private.w * &self.q % ord) % d).is_zero()),
            (
                "r in [1, d*2^16]".into(),
                self.r >= 1 && BigUint::from(self.r) <= d * BigUint::from(1u32 << 16),
            ),
            ("d does not divide rUS + xi".into(), !(s5 % d).is_zero()),
            ("loop exit condition".into(), exit),
        ]
    }
}

/// Signs `message`; see [`sign_with_transcript`].
pub fn sign<R: Rng + ?Sized>(
    private: &PrivateKey,
    common: &CommonParams,
    message: &[u8],
    hash: &dyn Digest,
    interp: &InterpretationConfig,
    rng: &mut R,
) -> Result<Signature, ReesseError> {
    sign_with_transcript(private, common, message, hash, interp, rng).map(|t| t.signature())
}

/// Signs and returns the full transcript. Candidates `ā` and `r` are drawn
/// until the side conditions hold; `ā` gets at most 10^4 draws.
pub fn sign_with_transcript<R: Rng + ?Sized>(
    private: &PrivateKey,
    common: &CommonParams,
    message: &[u8],
    hash: &dyn Digest,
    interp: &InterpretationConfig,
    rng: &mut R,
) -> Result<SigningTranscript, ReesseError> {
    let bits = digest_bits(hash, message, common.n)?;
    sign_digest(private, common, &bits, interp, rng)
}

/// Signs a digest `b_1..b_n` directly.
pub fn sign_digest<R: Rng + ?Sized>(
    private: &PrivateKey,
    common: &CommonParams,
    bits: &BitString,
    interp: &InterpretationConfig,
    rng: &mut R,
) -> Result<SigningTranscript, ReesseError> {
    if bits.len() != common.n {
        return Err(ReesseError::DigestLength { expected: common.n, got: bits.len() });
    }
    let ar = Arith::new(common, interp);
    let ord = common.order();
    let h = bits.to_biguint();
    let mut tr = SigningTranscript { h: h.clone(), bits: bits.clone(), ..Default::default() };

    let (w, delta, d) = (&private.w, &private.delta, &private.d);
    let delta_inv = mod_inv(delta, ord)
        .ok_or_else(|| ReesseError::Format("δ is not invertible modulo M-1".into()))?;
    let s_inv = common
        .s_inverse()
        .ok_or_else(|| ReesseError::Format("S is not invertible modulo M-1".into()))?;

    // S2
    let lever_sum: i64 = bits.iter().zip(&private.ell).filter(|(b, _)| *b).map(|(_, &l)| l).sum();
    let lever_sum = {
        let mag = BigUint::from(lever_sum.unsigned_abs()) % ord;
        if lever_sum < 0 && !mag.is_zero() {
            ord - mag
        } else {
            mag
        }
    };
    tr.k_bar = delta * lever_sum % ord;
    let selected = private
        .a
        .items()
        .iter()
        .zip(bits.iter())
        .filter(|(_, b)| *b)
        .fold(BigUint::one(), |acc, (&a, _)| ar.mul(&acc, &BigUint::from(a)));
    tr.g0 = match interp.g0_sign {
        G0Sign::Inverse => ar.pow(&ar.inv(&selected), delta),
        G0Sign::Direct => ar.pow(&selected, delta),
    };
    let g0_inv = ar.inv(&tr.g0);
    let dh_inv = ar.inv(&ar.mul(delta, &private.h_bar));
    let wh = w * &h % ord;
    let dt = d * &common.t;
    let r_hi = d * BigUint::from(1u32 << 16);
    let inner_budget = inner_limit(d);
    let two = BigUint::from(2u32);

    while tr.outer_iterations < OUTER_BUDGET {
        tr.outer_iterations += 1;
        // S3
        let a_bar = random_range(&two, &(ord - 1u32), rng);
        if (&a_bar % &dt).is_zero() {
            continue;
        }
        let q = (&a_bar * &private.big_d + &wh) % ord * &delta_inv % ord;
        tr.a_bar = a_bar;
        tr.q = q.clone();
        if q <= BigUint::one() || (w * &q % ord % d).is_zero() {
            continue;
        }
        // S4
        tr.big_r = ar.mul(&ar.pow(&ar.mul(&q, &dh_inv), &s_inv), &g0_inv);
        let k_minus_delta = (&ar.e(&tr.k_bar) + &ar.ered - ar.e(delta)) % &ar.ered;
        tr.u_bar = ar.pow(&ar.mul(&tr.big_r, &ar.pow(w, &k_minus_delta)), &q);
        tr.g_bar = ar.pow(delta, &(&tr.a_bar * &private.big_d));
        tr.xi = geom_sum(&(delta * &q % ord), &wh, &common.sigma, ord);
        let wq_pow = (w * &q % ord).modpow(&(&common.sigma - 1u32), ord);

        // S5, S6
        for _ in 0..inner_budget {
            tr.inner_draws += 1;
            let r = random_range(&BigUint::one(), &r_hi, rng);
            let u = ar.mul(&tr.u_bar, &ar.pow(&tr.g_bar, &r));
            if !ar.in_range(&u) {
                continue;
            }
            let rus = &r * &u * &common.s % ord;
            if ((&rus + &tr.xi) % ord % d).is_zero() {
                continue;
            }
            let divides = ((&wq_pow + &tr.xi + &rus) % ord % d).is_zero();
            let exit = match interp.loop_polarity {
                LoopPolarity::AsPrinted => divides,
                LoopPolarity::Inverted => !divides,
            };
            if exit {
                tr.r = r.try_into().expect("r below d*2^16");
                tr.u = u;
                return Ok(tr);
            }
        }
    }
    Err(ReesseError::RetryBudget(Box::new(tr)))
}

/// Draws of `r` per candidate `ā`; each succeeds with probability near
/// `1/d`, so the chance of giving up on a good `ā` is below `e^-64`.
fn inner_limit(d: &BigUint) -> u64 {
    let d = d.iter_u64_digits().next().unwrap_or(u64::MAX).min(1 << 20);
    64 * d + 64
}

#[cfg(test)]
mod tests {
    use super::super::{keygen, ParameterProfile};
    use super::*;
    use crate::digest::Sha256Digest;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> (super::super::PublicKey, PrivateKey, CommonParams) {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        keygen(&ParameterProfile::toy24(), &InterpretationConfig::reconciled(), &mut rng).unwrap()
    }

    #[test]
    fn transcript_side_conditions_hold() {
        let (_, sk, common) = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hash = Sha256Digest { bits: common.n };
        let tr = sign_with_transcript(&sk, &common, b"abc", &hash, &common.interp, &mut rng).unwrap();
        for (name, ok) in tr.side_conditions(&sk, &common) {
            assert!(ok, "{name}");
        }
        // ξ̄ against the direct sum of σ̄ terms is out of reach; check the
        // telescoping identity (δQ - HW)·ξ̄ = (δQ)^σ̄ - (HW)^σ̄ instead
        let ord = common.order();
        let a = &sk.delta * &tr.q % ord;
        let c = &sk.w * &tr.h % ord;
        let lhs = (&a + ord - &c) % ord * &tr.xi % ord;
        let rhs = (a.modpow(&common.sigma, ord) + ord - c.modpow(&common.sigma, ord)) % ord;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn signatures_differ_across_runs() {
        let (_, sk, common) = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let hash = Sha256Digest { bits: common.n };
        let mut seen = std::collections::HashSet::new();
        for _ in 0..100 {
            let s = sign(&sk, &common, b"same message", &hash, &common.interp, &mut rng).unwrap();
            assert!(seen.insert(s));
        }
    }

    #[test]
    fn rigged_w_exhausts_the_budget() {
        let (_, mut sk, common) = toy();
        // d | W makes d | WQ for every candidate
        sk.w = &sk.d * 3u32;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let hash = Sha256Digest { bits: common.n };
        match sign(&sk, &common, b"abc", &hash, &common.interp, &mut rng) {
            Err(ReesseError::RetryBudget(tr)) => assert_eq!(tr.outer_iterations, OUTER_BUDGET),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_digest_width_is_an_error() {
        let (_, sk, common) = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let hash = Sha256Digest { bits: common.n + 1 };
        assert!(matches!(
            sign(&sk, &common, b"abc", &hash, &common.interp, &mut rng),
            Err(ReesseError::DigestLength { .. })
        ));
    }
}
