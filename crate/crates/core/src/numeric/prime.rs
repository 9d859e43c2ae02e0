use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_range, FactoredModulus, NumericError};

/// Miller-Rabin rounds; 4^-40 = 2^-80 error bound for composites.
const MR_ROUNDS: usize = 40;
const MAX_PRIME_ATTEMPTS: u64 = 1_000_000;
const TRIAL_LIMIT: u64 = 1 << 20;

/// One prime power `prime^exp` of a factorization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Factor {
    pub prime: BigUint,
    pub exp: u32,
}

impl Factor {
    pub fn new(prime: impl Into<BigUint>, exp: u32) -> Self {
        Factor { prime: prime.into(), exp }
    }

    pub fn value(&self) -> BigUint {
        num_traits::pow(self.prime.clone(), self.exp as usize)
    }
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// The first `k` primes.
pub fn first_primes(k: usize) -> Vec<u64> {
    let mut bound = 32u64;
    loop {
        let ps = primes_up_to(bound);
        if ps.len() >= k {
            return ps[..k].to_vec();
        }
        bound *= 2;
    }
}

fn small_primes() -> &'static [u64] {
    static SMALL: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    SMALL.get_or_init(|| primes_up_to(1000))
}

/// Probabilistic primality with error at most 2^-80.
///
/// Trial division by primes below 1000, then 40 Miller-Rabin rounds. The
/// first thirteen bases are the primes 2..=41 (deterministic below ~2^81);
/// the rest come from a fixed-seed generator so the test is a pure function.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
    }
    for &p in small_primes() {
        let bp = BigUint::from(p);
        if n == &bp {
            return true;
        }
        if (n % &bp).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            return true;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                return true;
            }
            if x == one {
                return false;
            }
        }
        false
    };
    let fixed = &small_primes()[..13];
    if !fixed.iter().all(|&a| witness(&BigUint::from(a))) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b1d0);
    let two = BigUint::from(2u32);
    let hi = n - &two;
    (fixed.len()..MR_ROUNDS).all(|_| witness(&random_range(&two, &hi, &mut rng)))
}

/// Factors `k` by trial division up to 2^20. Succeeds when the leftover is
/// 1 or a probable prime.
pub fn factor_small(k: &BigUint) -> Option<Vec<Factor>> {
    let mut rest = k.clone();
    let mut out = Vec::new();
    if rest.is_zero() {
        return None;
    }
    let mut p = 2u64;
    while p < TRIAL_LIMIT {
        let bp = BigUint::from(p);
        if &bp * &bp > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push(Factor::new(bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        if !is_probable_prime(&rest) {
            return None;
        }
        out.push(Factor::new(rest, 1));
    }
    Some(out)
}

pub(crate) fn merge_factors(parts: impl IntoIterator<Item = Factor>) -> Vec<Factor> {
    let mut all: Vec<Factor> = Vec::new();
    for f in parts {
        if f.exp == 0 {
            continue;
        }
        match all.iter_mut().find(|g| g.prime == f.prime) {
            Some(g) => g.exp += f.exp,
            None => all.push(f),
        }
    }
    all.sort();
    all
}

/// Finds a prime `M` of exactly `m` bits with every `required` prime power
/// dividing `M - 1`.
///
/// `M - 1 = 2 * prod(required) * k` with `k` uniform over the range that
/// keeps the bit length at `m`. Candidates whose `k` does not factor by trial
/// division are skipped so the returned factorization is complete.
pub fn find_prime_with_divisors<R: Rng + ?Sized>(
    m: u64,
    required: &[Factor],
    rng: &mut R,
) -> Result<FactoredModulus, NumericError> {
    let base = required
        .iter()
        .fold(BigUint::from(2u32), |acc, f| acc * f.value());
    let used: u64 = required.iter().map(|f| f.value().bits()).sum();
    let budget = m.saturating_sub(2);
    if m < 3 || used >= budget {
        return Err(NumericError::BudgetExceeded { m, used, budget });
    }
    // 2^(m-1) <= base*k + 1 < 2^m
    let lo_target = BigUint::one() << (m - 1);
    let hi_target = (BigUint::one() << m) - 2u32;
    let k_lo = (&lo_target + &base - 2u32) / &base;
    let k_hi = &hi_target / &base;
    let k_lo = k_lo.max(BigUint::one());
    if k_lo > k_hi {
        return Err(NumericError::BudgetExceeded { m, used, budget });
    }
    for _ in 0..MAX_PRIME_ATTEMPTS {
        let k = random_range(&k_lo, &k_hi, rng);
        let order = &base * &k;
        let candidate = &order + 1u32;
        if candidate.bits() != m || !is_probable_prime(&candidate) {
            continue;
        }
        let Some(k_factors) = factor_small(&k) else {
            continue;
        };
        let factors = merge_factors(
            std::iter::once(Factor::new(2u32, 1))
                .chain(required.iter().cloned())
                .chain(k_factors),
        );
        return Ok(FactoredModulus::from_parts(candidate, factors)
            .expect("constructed factorization is consistent"));
    }
    Err(NumericError::SearchExhausted(MAX_PRIME_ATTEMPTS))
}

/// Least prime factor of `n` when it is below `limit`.
pub(crate) fn least_factor_below(n: &BigUint, limit: u64) -> Option<u64> {
    let mut p = 2u64;
    while p < limit {
        if (n % p).is_zero() {
            return Some(p);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    None
}
