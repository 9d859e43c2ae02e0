//! The Juna non-iterative hash.
//!
//! A message `b_1 .. b_n` is turned into per-position exponents (its bit
//! shadows, then long-shadows) and compressed as `prod C_i^(exponent_i) mod M`
//! over a public initial value `({C_i}, M)` produced once by [`hash_init`].

use std::collections::HashSet;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::bits::{hex_padded, parse_hex, BitString};
use crate::numeric::{
    self, find_generator, gen_coprime_sequence, is_probable_prime, mod_inv, random_below,
    random_range, Factor, FactoredModulus, NumericError,
};

#[derive(Debug, Error)]
pub enum JunaError {
    #[error("message must be nonzero")]
    ZeroMessage,
    #[error("message has {got} bits, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid hash configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("initial value file: {0}")]
    Format(String),
}

/// Dimensions of a Juna hash instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashConfig {
    /// Modulus bit length.
    pub m: u64,
    /// Message bit length.
    pub n: usize,
    /// Largest value allowed in the coprime sequence.
    pub prime_bound: u64,
    /// Size of the lever set `{±5, ±7, .., ±(2ñ+3)}`.
    pub n_tilde: u64,
    /// Outside the published ranges; only for tests and demos.
    pub toy: bool,
}

impl HashConfig {
    /// A configuration within the published ranges.
    pub fn new(m: u64, n: usize, prime_bound: u64, n_tilde: u64) -> Result<Self, JunaError> {
        let cfg = HashConfig { m, n, prime_bound, n_tilde, toy: false };
        if !(80..=232).contains(&m) {
            return Err(JunaError::Config(format!("m = {m} outside [80, 232]")));
        }
        if (n as u64) < m || n > 4096 {
            return Err(JunaError::Config(format!("n = {n} outside [m, 4096]")));
        }
        let lg = cfg.lg_prime_bound();
        if !(10..=32).contains(&lg) {
            return Err(JunaError::Config(format!("ceil(lg P) = {lg} outside [10, 32]")));
        }
        if n_tilde < n as u64 || n_tilde > 1 << 32 {
            return Err(JunaError::Config(format!("n_tilde = {n_tilde} outside [n, 2^32]")));
        }
        cfg.check_common()?;
        Ok(cfg)
    }

    /// A reduced configuration for oracle tests; keeps the structural
    /// invariants (even `n`, feasibility) but ignores the published ranges.
    pub fn toy(m: u64, n: usize, prime_bound: u64, n_tilde: u64) -> Result<Self, JunaError> {
        let cfg = HashConfig { m, n, prime_bound, n_tilde, toy: true };
        if m < 8 || n < 2 || prime_bound < 3 || n_tilde < n as u64 {
            return Err(JunaError::Config("toy configuration too small".into()));
        }
        cfg.check_common()?;
        Ok(cfg)
    }

    /// The published row for `m = 80`: `|A| = 2^10`, `|Q| = n`.
    pub fn paper_80() -> Self {
        HashConfig::new(80, 80, 1021, 80).expect("published configuration")
    }

    /// The published row for `m = 128`: `|A| = 2^16`, `|Q| = 2^12`.
    pub fn paper_128() -> Self {
        HashConfig::new(128, 128, 65521, 1 << 12).expect("published configuration")
    }

    fn check_common(&self) -> Result<(), JunaError> {
        if !self.n.is_multiple_of(2) {
            return Err(JunaError::Config(format!("n = {} must be even", self.n)));
        }
        let lhs = BigUint::from(2u32)
            * num_traits::pow(BigUint::from(self.n_tilde), 5)
            * num_traits::pow(BigUint::from(self.prime_bound), 5);
        if lhs < BigUint::one() << self.m {
            return Err(JunaError::Config("2·ñ^5·P^5 < 2^m".into()));
        }
        Ok(())
    }

    /// `ceil(lg P)`.
    pub fn lg_prime_bound(&self) -> u64 {
        64 - (self.prime_bound - 1).leading_zeros() as u64
    }

    /// Threshold for the least prime factor of `(M-1)/2`.
    pub fn least_factor_threshold(&self) -> u64 {
        4 * self.n as u64 * (2 * self.n_tilde + 3)
    }
}

/// Bit shadows of a nonzero string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadowVector {
    values: Vec<u32>,
    source: BitString,
}

impl ShadowVector {
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn source(&self) -> &BitString {
        &self.source
    }
}

/// Each 1-bit gets one plus the run of zeros before it; the leftmost 1-bit
/// also absorbs the trailing zeros. Zero bits stay zero.
pub fn bit_shadow(bits: &BitString) -> Result<ShadowVector, JunaError> {
    if bits.is_zero() {
        return Err(JunaError::ZeroMessage);
    }
    let mut values = vec![0u32; bits.len()];
    let mut run = 0u32;
    let mut leftmost = 0usize;
    for (i, b) in bits.iter().enumerate() {
        if !b {
            run += 1;
        } else {
            if i as u32 == run {
                leftmost = i;
            }
            values[i] = run + 1;
            run = 0;
        }
    }
    values[leftmost] += run;
    Ok(ShadowVector { values, source: bits.clone() })
}

/// Long-shadows: each shadow doubled when the bit `n/2` positions away (to
/// the right in the first half, to the left in the second) is set.
pub fn bit_long_shadow(bits: &BitString) -> Result<Vec<u32>, JunaError> {
    let n = bits.len();
    if !n.is_multiple_of(2) {
        return Err(JunaError::Config(format!("length {n} must be even")));
    }
    let shadow = bit_shadow(bits)?;
    let half = n / 2;
    Ok(shadow
        .values
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let partner = if i < half { i + half } else { i - half };
            if bits.get(partner) {
                s * 2
            } else {
                s
            }
        })
        .collect())
}

/// Public initial value `({C_i}, M)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashInitValue {
    c: Vec<BigUint>,
    modulus: BigUint,
    m: u64,
    n: usize,
    config: Option<HashConfig>,
}

impl HashInitValue {
    /// Builds an initial value from explicit parts; every `C_i` must lie in
    /// `(1, M)` and `n` must be even.
    pub fn from_parts(c: Vec<BigUint>, modulus: BigUint) -> Result<Self, JunaError> {
        let n = c.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(JunaError::Config(format!("n = {n} must be even and positive")));
        }
        if let Some(i) = c.iter().position(|x| x <= &BigUint::one() || x >= &modulus) {
            return Err(JunaError::Config(format!("C_{} outside (1, M)", i + 1)));
        }
        let m = modulus.bits();
        Ok(HashInitValue { c, modulus, m, n, config: None })
    }

    pub fn c(&self) -> &[BigUint] {
        &self.c
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> Option<&HashConfig> {
        self.config.as_ref()
    }

    /// Hex width of a digest.
    pub fn digest_hex_width(&self) -> usize {
        self.m.div_ceil(4) as usize
    }

    pub fn digest_hex(&self, digest: &BigUint) -> String {
        hex_padded(digest, self.digest_hex_width())
    }

    /// Invariant checks, one `(name, passed)` entry each.
    pub fn audit(&self) -> Vec<(String, bool)> {
        let one = BigUint::one();
        let mut out = vec![
            ("M is prime".to_string(), is_probable_prime(&self.modulus)),
            (format!("bit-length(M) = {}", self.m), self.modulus.bits() == self.m),
            (
                "every C_i in (1, M)".to_string(),
                self.c.iter().all(|x| x > &one && x < &self.modulus),
            ),
            (format!("{} items", self.n), self.c.len() == self.n && self.n.is_multiple_of(2)),
        ];
        let half = (&self.modulus - 1u32) >> 1;
        let threshold = self
            .config
            .as_ref()
            .map(HashConfig::least_factor_threshold)
            .unwrap_or(4 * self.n as u64 * (2 * self.n as u64 + 3));
        let structure_ok = is_probable_prime(&half)
            || numeric::least_factor_below(&half, threshold).is_none();
        out.push(("(M-1)/2 prime or least factor large".to_string(), structure_ok));
        out
    }

    pub fn audit_passes(&self) -> bool {
        self.audit().iter().all(|(_, ok)| *ok)
    }

    /// `m`, `n`, `M` (hex), then one `C_i` (hex) per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n{}\n{:x}\n", self.m, self.n, self.modulus);
        for c in &self.c {
            let _ = writeln!(s, "{c:x}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, JunaError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| JunaError::Format(format!("missing {what}")))
        };
        let m: u64 = next("m")?
            .parse()
            .map_err(|_| JunaError::Format("bad m".into()))?;
        let n: usize = next("n")?
            .parse()
            .map_err(|_| JunaError::Format("bad n".into()))?;
        let modulus = parse_hex(next("M")?).ok_or_else(|| JunaError::Format("bad M".into()))?;
        let c = (0..n)
            .map(|i| {
                next("C_i").and_then(|l| {
                    parse_hex(l).ok_or_else(|| JunaError::Format(format!("bad C_{}", i + 1)))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let iv = HashInitValue::from_parts(c, modulus)?;
        if iv.m != m {
            return Err(JunaError::Format(format!("declared m = {m}, modulus has {} bits", iv.m)));
        }
        Ok(iv)
    }
}

/// Private half of an initialization; never leaves [`hash_init`].
struct InitSecrets {
    sequence: Vec<u64>,
    levers: Vec<i64>,
    w: BigUint,
    delta: BigUint,
}

impl Drop for InitSecrets {
    fn drop(&mut self) {
        self.sequence.iter_mut().for_each(|a| *a = 0);
        self.levers.iter_mut().for_each(|l| *l = 0);
        self.w.set_zero();
        self.delta.set_zero();
    }
}

/// `m`-bit prime with `(M-1)/2` prime.
fn find_safe_prime<R: Rng + ?Sized>(m: u64, rng: &mut R) -> Result<FactoredModulus, JunaError> {
    let sieve = numeric::primes_up_to(2000);
    let lo = BigUint::one() << (m - 2);
    let hi = (BigUint::one() << (m - 1)) - 1u32;
    for _ in 0..5_000_000u64 {
        let mut q = random_range(&lo, &hi, rng);
        q.set_bit(0, true);
        let p = (&q << 1) + 1u32;
        // both q and 2q+1 free of small factors
        let small_hit = sieve.iter().any(|&s| {
            let qs = (&q % s).to_u64_digits().first().copied().unwrap_or(0);
            (qs == 0 && q != BigUint::from(s)) || (2 * qs + 1) % s == 0 && p != BigUint::from(s)
        });
        if small_hit || !is_probable_prime(&q) || !is_probable_prime(&p) || p.bits() != m {
            continue;
        }
        let factors = vec![Factor::new(2u32, 1), Factor::new(q, 1)];
        return Ok(FactoredModulus::from_parts(p, factors).expect("2q = M - 1"));
    }
    Err(NumericError::SearchExhausted(5_000_000).into())
}

fn pow_signed(base: &BigUint, exp: i64, modulus: &BigUint) -> BigUint {
    let e = BigUint::from(exp.unsigned_abs());
    if exp >= 0 {
        base.modpow(&e, modulus)
    } else {
        mod_inv(base, modulus)
            .expect("base is a unit modulo a prime")
            .modpow(&e, modulus)
    }
}

/// Draws `count` pairwise distinct levers `±l` with `l` odd in
/// `[5, 2*limit + 3]`, one sign per magnitude.
pub(crate) fn draw_levers<R: Rng + ?Sized>(count: usize, limit: u64, rng: &mut R) -> Vec<i64> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mag = 5 + 2 * rng.gen_range(0..limit) as i64;
        if seen.insert(mag) {
            out.push(if rng.gen_bool(0.5) { mag } else { -mag });
        }
    }
    out
}

/// One-time initialization producing a public initial value.
///
/// `W = g^F` for a generator `g` and a divisor `F < 2^ceil(lg P)` of `M-1`,
/// so `‖W‖ = (M-1)/F >= 2^(m - ceil(lg P))`.
pub fn hash_init<R: Rng + ?Sized>(config: &HashConfig, rng: &mut R) -> Result<HashInitValue, JunaError> {
    if config.n as u64 > config.n_tilde {
        return Err(JunaError::Config("n_tilde < n".into()));
    }
    let sequence = gen_coprime_sequence(config.n, config.prime_bound, rng)?;
    let ctx = find_safe_prime(config.m, rng)?;
    let modulus = ctx.modulus().clone();
    let order = ctx.order().clone();

    let f_limit = BigUint::one() << config.lg_prime_bound();
    let divisors: Vec<BigUint> = small_divisors(&ctx)
        .into_iter()
        .filter(|f| f > &BigUint::one() && f < &f_limit)
        .collect();
    let min_order = BigUint::one() << config.m.saturating_sub(config.lg_prime_bound());
    let g = find_generator(&ctx, rng)?;
    let f = divisors[rng.gen_range(0..divisors.len())].clone();
    let w = g.modpow(&f, &modulus);
    debug_assert!(&order / &f >= min_order);

    let delta = loop {
        let cand = random_range(&BigUint::from(2u32), &(&order - 1u32), rng);
        if cand.gcd(&order).is_one() {
            break cand;
        }
    };
    let secrets = InitSecrets {
        sequence: sequence.items().to_vec(),
        levers: draw_levers(config.n, config.n_tilde, rng),
        w,
        delta,
    };
    let c = secrets
        .sequence
        .iter()
        .zip(&secrets.levers)
        .map(|(&a, &l)| {
            let base = BigUint::from(a) * pow_signed(&secrets.w, l, &modulus) % &modulus;
            base.modpow(&secrets.delta, &modulus)
        })
        .collect::<Vec<_>>();
    drop(secrets);

    if c.iter().any(|x| x <= &BigUint::one()) {
        // C_i = 1 would make the value useless; astronomically unlikely
        return hash_init(config, rng);
    }
    Ok(HashInitValue {
        c,
        modulus,
        m: config.m,
        n: config.n,
        config: Some(config.clone()),
    })
}

/// Divisors of `M - 1` below 2^32 built from its factorization.
fn small_divisors(ctx: &FactoredModulus) -> Vec<BigUint> {
    let cap = BigUint::one() << 32;
    let mut divs = vec![BigUint::one()];
    for f in ctx.factors() {
        let mut next = Vec::new();
        for d in &divs {
            let mut v = d.clone();
            for _ in 0..=f.exp {
                if v >= cap {
                    break;
                }
                next.push(v.clone());
                v *= &f.prime;
            }
        }
        divs = next;
    }
    divs
}

/// Compresses an `n`-bit nonzero message to an `m`-bit digest.
pub fn hash_compress(iv: &HashInitValue, bits: &BitString) -> Result<BigUint, JunaError> {
    if bits.len() != iv.n {
        return Err(JunaError::WrongLength { expected: iv.n, got: bits.len() });
    }
    let exps = bit_long_shadow(bits)?;
    Ok(iv
        .c
        .iter()
        .zip(exps)
        .filter(|(_, e)| *e > 0)
        .fold(BigUint::one(), |acc, (c, e)| {
            acc * c.modpow(&BigUint::from(e), &iv.modulus) % &iv.modulus
        }))
}

/// A random nonzero message of `n` bits; test and demo helper.
pub fn random_message<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitString {
    loop {
        let v = random_below(&(BigUint::one() << n), rng);
        let b = BitString::from_biguint(&v, n).expect("fits");
        if !b.is_zero() {
            return b;
        }
    }
}
