//! Arbitrary-precision number theory used by the hash and the signature
//! scheme: inverses, primality, constrained prime search, element orders,
//! coprime sequences and geometric sums over huge term counts.

mod group;
mod prime;

pub use group::{element_of_order, element_order, find_generator, FactoredModulus};
pub(crate) use prime::least_factor_below;
pub use prime::{
    factor_small, find_prime_with_divisors, first_primes, is_probable_prime, primes_up_to,
    Factor,
};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericError {
    #[error("required divisors use {used} bits, budget for a {m}-bit modulus is {budget}")]
    BudgetExceeded { m: u64, used: u64, budget: u64 },
    #[error("prime search exhausted after {0} attempts")]
    SearchExhausted(u64),
    #[error("element is not a unit modulo the prime")]
    NotUnit,
    #[error("{0} does not divide the group order")]
    NotDivisor(BigUint),
    #[error("difference is not invertible modulo the ring")]
    NonInvertible,
    #[error("need {needed} pairwise coprime values but only {available} primes are at most {bound}")]
    BoundTooSmall { needed: usize, available: usize, bound: u64 },
}

pub fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    a.gcd(b)
}

/// `base^exp mod modulus`.
pub fn mod_pow(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> BigUint {
    base.modpow(exp, modulus)
}

/// Inverse of `a` modulo `modulus`, or `None` when `gcd(a, modulus) != 1`.
pub fn mod_inv(a: &BigUint, modulus: &BigUint) -> Option<BigUint> {
    if modulus <= &BigUint::one() {
        return None;
    }
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a % modulus), m.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return None;
    }
    old_s.mod_floor(&m).to_biguint()
}

/// Additive inverse of `x` in `Z_modulus`.
pub fn mod_neg(x: &BigUint, modulus: &BigUint) -> BigUint {
    let r = x % modulus;
    if r.is_zero() {
        r
    } else {
        modulus - r
    }
}

/// `sum_{i=0}^{count-1} a^(count-1-i) * c^i mod modulus`.
///
/// Evaluated by binary splitting in `O(log count)` ring operations, so it is
/// defined for every modulus, including ones where `a - c` has no inverse.
pub fn geom_sum(a: &BigUint, c: &BigUint, count: &BigUint, modulus: &BigUint) -> BigUint {
    if count.is_zero() {
        return BigUint::zero();
    }
    let a = a % modulus;
    let c = c % modulus;
    // Invariant for prefix length k: (sum_k, a^k, c^k).
    let mut sum = BigUint::zero();
    let mut pa = BigUint::one() % modulus;
    let mut pc = BigUint::one() % modulus;
    for i in (0..count.bits()).rev() {
        // k -> 2k: S(2k) = a^k S(k) + c^k S(k)
        sum = (&sum * ((&pa + &pc) % modulus)) % modulus;
        pa = (&pa * &pa) % modulus;
        pc = (&pc * &pc) % modulus;
        if count.bit(i) {
            // k -> k+1: S(k+1) = a S(k) + c^k
            sum = (&a * &sum + &pc) % modulus;
            pa = (&pa * &a) % modulus;
            pc = (&pc * &c) % modulus;
        }
    }
    sum
}

/// Closed form `(a^count - c^count) / (a - c)`; fails when the difference is
/// not a unit. Equal to [`geom_sum`] whenever it succeeds.
pub fn geom_sum_closed_form(
    a: &BigUint,
    c: &BigUint,
    count: &BigUint,
    modulus: &BigUint,
) -> Result<BigUint, NumericError> {
    let a = a % modulus;
    let c = c % modulus;
    if a == c {
        if count.is_zero() {
            return Ok(BigUint::zero());
        }
        let e = count - 1u32;
        return Ok((count % modulus) * mod_pow(&a, &e, modulus) % modulus);
    }
    let diff = (&a + modulus - &c) % modulus;
    let inv = mod_inv(&diff, modulus).ok_or(NumericError::NonInvertible)?;
    let num = (mod_pow(&a, count, modulus) + modulus - mod_pow(&c, count, modulus)) % modulus;
    Ok(num * inv % modulus)
}

/// Uniform value in `[0, bound)`. `bound` must be nonzero.
pub fn random_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    assert!(!bound.is_zero(), "random_below with zero bound");
    let bits = bound.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let excess = (nbytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess;
        let v = BigUint::from_bytes_be(&buf);
        if &v < bound {
            return v;
        }
    }
}

/// Uniform value in `[lo, hi]`.
pub fn random_range<R: Rng + ?Sized>(lo: &BigUint, hi: &BigUint, rng: &mut R) -> BigUint {
    assert!(lo <= hi, "empty range");
    lo + random_below(&(hi - lo + 1u32), rng)
}

/// A list of pairwise coprime naturals, each in `[2, bound]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoprimeSequence {
    items: Vec<u64>,
    bound: u64,
}

impl CoprimeSequence {
    /// Wraps an existing list after checking the invariants.
    pub fn new(items: Vec<u64>, bound: u64) -> Option<Self> {
        let seq = CoprimeSequence { items, bound };
        seq.is_valid().then_some(seq)
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.items.iter().all(|&a| a >= 2 && a <= self.bound)
            && self.items.iter().enumerate().all(|(i, &a)| {
                self.items[i + 1..].iter().all(|&b| a.gcd(&b) == 1)
            })
    }
}

/// Draws `n` pairwise coprime values from `[2, bound]` in random order.
pub fn gen_coprime_sequence<R: Rng + ?Sized>(
    n: usize,
    bound: u64,
    rng: &mut R,
) -> Result<CoprimeSequence, NumericError> {
    // Enough primes must exist; the prime count check is exact for small
    // bounds and skipped above 2^24, where it always holds for n <= 4096.
    if bound < (1 << 24) {
        let available = primes_up_to(bound).len();
        if available < n {
            return Err(NumericError::BoundTooSmall { needed: n, available, bound });
        }
    }
    for _ in 0..32 {
        let mut items: Vec<u64> = Vec::with_capacity(n);
        let mut misses = 0usize;
        while items.len() < n && misses < 64 * n + 256 {
            let x = rng.gen_range(2..=bound);
            if items.iter().all(|&a| a.gcd(&x) == 1) {
                items.push(x);
            } else {
                misses += 1;
            }
        }
        if items.len() == n {
            return Ok(CoprimeSequence { items, bound });
        }
    }
    // Dense request: fall back to a random selection of primes.
    let mut primes = primes_up_to(bound.min(1 << 24));
    for i in (1..primes.len()).rev() {
        primes.swap(i, rng.gen_range(0..=i));
    }
    primes.truncate(n);
    Ok(CoprimeSequence { items: primes, bound })
}
