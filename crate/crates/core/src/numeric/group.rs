use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use super::{random_range, Factor, NumericError};

/// A prime modulus together with the full factorization of the order of its
/// multiplicative group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredModulus {
    modulus: BigUint,
    order: BigUint,
    factors: Vec<Factor>,
}

impl FactoredModulus {
    /// Checks that `factors` multiply to `modulus - 1`; primality of the
    /// modulus is the caller's business (see [`Self::is_consistent`]).
    pub fn from_parts(modulus: BigUint, factors: Vec<Factor>) -> Option<Self> {
        if modulus < BigUint::from(3u32) {
            return None;
        }
        let order = &modulus - 1u32;
        let product = factors.iter().fold(BigUint::one(), |acc, f| acc * f.value());
        (product == order).then_some(FactoredModulus { modulus, order, factors })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// `M - 1`.
    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn bits(&self) -> u64 {
        self.modulus.bits()
    }

    /// Modulus prime and every listed factor prime.
    pub fn is_consistent(&self) -> bool {
        super::is_probable_prime(&self.modulus)
            && self.factors.iter().all(|f| super::is_probable_prime(&f.prime))
    }

    /// Whether `t` divides the group order.
    pub fn divides_order(&self, t: &BigUint) -> bool {
        !t.is_zero() && (&self.order % t).is_zero()
    }
}

/// Multiplicative order of `x` modulo the prime, by peeling prime factors
/// off the group order.
pub fn element_order(x: &BigUint, ctx: &FactoredModulus) -> Result<BigUint, NumericError> {
    let x = x % ctx.modulus();
    if x.is_zero() {
        return Err(NumericError::NotUnit);
    }
    let mut t = ctx.order().clone();
    for f in ctx.factors() {
        for _ in 0..f.exp {
            let (q, r) = t.div_rem(&f.prime);
            if !r.is_zero() || !x.modpow(&q, ctx.modulus()).is_one() {
                break;
            }
            t = q;
        }
    }
    Ok(t)
}

/// A generator of the multiplicative group (random search with the
/// standard `x^((M-1)/p) != 1` test for every prime `p`).
pub fn find_generator<R: Rng + ?Sized>(
    ctx: &FactoredModulus,
    rng: &mut R,
) -> Result<BigUint, NumericError> {
    let two = BigUint::from(2u32);
    let hi = ctx.modulus() - 1u32;
    for _ in 0..10_000 {
        let g = random_range(&two, &hi, rng);
        let generates = ctx
            .factors()
            .iter()
            .all(|f| !g.modpow(&(ctx.order() / &f.prime), ctx.modulus()).is_one());
        if generates {
            return Ok(g);
        }
    }
    Err(NumericError::SearchExhausted(10_000))
}

/// An element of exact order `t`, as `g^((M-1)/t)` for a fresh generator;
/// the order is re-verified before returning.
pub fn element_of_order<R: Rng + ?Sized>(
    t: &BigUint,
    ctx: &FactoredModulus,
    rng: &mut R,
) -> Result<BigUint, NumericError> {
    if !ctx.divides_order(t) {
        return Err(NumericError::NotDivisor(t.clone()));
    }
    if t.is_one() {
        return Ok(BigUint::one());
    }
    let cofactor = ctx.order() / t;
    for _ in 0..64 {
        let g = find_generator(ctx, rng)?;
        let x = g.modpow(&cofactor, ctx.modulus());
        if &element_order(&x, ctx)? == t {
            return Ok(x);
        }
    }
    Err(NumericError::SearchExhausted(64))
}
