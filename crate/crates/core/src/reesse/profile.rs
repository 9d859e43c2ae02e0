use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use super::ReesseError;
use crate::numeric::{first_primes, is_probable_prime, random_range, Factor};

/// Whether a profile satisfies the published parameter ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Paper,
    /// Scaled-down bounds for tests and demos; not conforming.
    Toy,
}

/// Parameters chosen before the modulus search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterProfile {
    pub name: String,
    pub kind: ProfileKind,
    /// Bit length of the prime modulus.
    pub m: u64,
    /// Sequence length.
    pub n: usize,
    pub d: u64,
    /// `D` as a factored product.
    pub big_d: Vec<Factor>,
    pub t: u64,
    /// Upper end of the set `{2, ..., a_bound}` the `A_i` are drawn from.
    pub a_bound: u64,
    /// Target for `∏ e_i` under the strict budget reading.
    pub exponent_target: u64,
    /// `S^-1 mod (M-1)` is drawn below `2^s_inv_bits`.
    pub s_inv_bits: u32,
}

/// Bits left for the random cofactor of `M - 1`.
pub(crate) const COFACTOR_RESERVE: u64 = 8;

impl ParameterProfile {
    /// `m = 24, n = 8, d = 5, T = 7, D = 11·13`.
    pub fn toy24() -> Self {
        ParameterProfile {
            name: "toy24".into(),
            kind: ProfileKind::Toy,
            m: 24,
            n: 8,
            d: 5,
            big_d: vec![Factor::new(11u32, 1), Factor::new(13u32, 1)],
            t: 7,
            a_bound: 863,
            exponent_target: 4,
            s_inv_bits: 8,
        }
    }

    /// `m = 32, n = 16, d = 7, T = 29, D = 11·13`.
    pub fn toy32() -> Self {
        ParameterProfile {
            name: "toy32".into(),
            kind: ProfileKind::Toy,
            m: 32,
            n: 16,
            d: 7,
            big_d: vec![Factor::new(11u32, 1), Factor::new(13u32, 1)],
            t: 29,
            a_bound: 863,
            exponent_target: 4,
            s_inv_bits: 8,
        }
    }

    /// A published-range profile with random `d`, `D`, `T`.
    ///
    /// `d` is a prime in `[5, 2^8]`, `T` a prime in `[2^9, 2^10)` and
    /// `D = 4p` with `p` a prime in `[2^52, 2^53)`, so `D >= 2^54` and
    /// `lg(dDT) >= 64`. `d` is redrawn until `2dDT` leaves room for the
    /// cofactor of `M - 1`.
    pub fn paper<R: Rng + ?Sized>(m: u64, n: usize, rng: &mut R) -> Result<Self, ReesseError> {
        if !(80..=96).contains(&m) || n < 80 || n as u64 > m || !n.is_multiple_of(2) {
            return Err(ReesseError::Profile(format!(
                "published ranges need 80 <= n <= m <= 96 with n even, got m={m} n={n}"
            )));
        }
        let p = random_prime(&(BigUint::one() << 52), &((BigUint::one() << 53) - 1u32), rng);
        let t = random_prime(&BigUint::from(1u32 << 9), &BigUint::from((1u32 << 10) - 1), rng)
            .to_u64()
            .expect("small");
        let big_d = vec![Factor::new(2u32, 2), Factor::new(p, 1)];
        for _ in 0..1000 {
            let d = random_prime(&BigUint::from(5u32), &BigUint::from(256u32), rng)
                .to_u64()
                .expect("small");
            if d == t {
                continue;
            }
            let profile = ParameterProfile {
                name: format!("paper{m}"),
                kind: ProfileKind::Paper,
                m,
                n,
                d,
                big_d: big_d.clone(),
                t,
                a_bound: 863,
                exponent_target: 256,
                s_inv_bits: 16,
            };
            if profile.required_bits() + COFACTOR_RESERVE <= m {
                profile.validate()?;
                return Ok(profile);
            }
        }
        Err(ReesseError::Profile("no d leaves room for the cofactor".into()))
    }

    /// A custom profile; `validate` runs before returning.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: &str,
        kind: ProfileKind,
        m: u64,
        n: usize,
        d: u64,
        big_d: Vec<Factor>,
        t: u64,
    ) -> Result<Self, ReesseError> {
        let p = ParameterProfile {
            name: name.into(),
            kind,
            m,
            n,
            d,
            big_d,
            t,
            a_bound: 863,
            exponent_target: if kind == ProfileKind::Paper { 256 } else { 4 },
            s_inv_bits: if kind == ProfileKind::Paper { 16 } else { 8 },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "toy24" => Some(Self::toy24()),
            "toy32" => Some(Self::toy32()),
            _ => None,
        }
    }

    pub fn big_d_value(&self) -> BigUint {
        self.big_d.iter().fold(BigUint::one(), |a, f| a * f.value())
    }

    /// `d·D·T`, the order of δ.
    pub fn ddt(&self) -> BigUint {
        self.big_d_value() * self.d * self.t
    }

    /// Bits of `2dDT`, the forced part of `M - 1`.
    pub fn required_bits(&self) -> u64 {
        (self.ddt() * 2u32).bits()
    }

    /// `p_1 .. p_(n/2)`.
    pub fn first_half_primes(&self) -> Vec<u64> {
        first_primes(self.n / 2)
    }

    /// Primes allowed in the `∏ p_i^e_i` factor: those below `p_(n/2)`.
    pub fn small_primes(&self) -> Vec<u64> {
        let mut ps = self.first_half_primes();
        ps.pop();
        ps
    }

    pub fn validate(&self) -> Result<(), ReesseError> {
        let err = |s: String| Err(ReesseError::Profile(s));
        let big_d = self.big_d_value();
        if self.d < 2 || self.t < 2 || big_d < BigUint::from(2u32) {
            return err("d, D, T must all exceed 1".into());
        }
        if self.big_d.iter().any(|f| !is_probable_prime(&f.prime)) {
            return err("D factorization lists a composite".into());
        }
        let (d, t) = (BigUint::from(self.d), BigUint::from(self.t));
        if !d.gcd(&t).is_one() || !d.gcd(&big_d).is_one() || !t.gcd(&big_d).is_one() {
            return err(format!("d={}, D={}, T={} are not pairwise coprime", self.d, big_d, self.t));
        }
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return err(format!("n={} must be even and at least 2", self.n));
        }
        if self.n as u64 > self.m {
            return err(format!("n={} exceeds m={}", self.n, self.m));
        }
        if self.required_bits() + 2 > self.m {
            return err(format!("2dDT needs {} bits, m={}", self.required_bits(), self.m));
        }
        if self.kind == ProfileKind::Paper {
            let failures = self.published_range_failures();
            if !failures.is_empty() {
                return err(failures.join("; "));
            }
        }
        Ok(())
    }

    /// Published range conditions this profile violates.
    pub fn published_range_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(80..=96).contains(&self.m) {
            out.push(format!("m={} outside [80, 96]", self.m));
        }
        if self.n < 80 || self.n as u64 > self.m {
            out.push(format!("n={} outside [80, m]", self.n));
        }
        if !(5..=256).contains(&self.d) {
            out.push(format!("d={} outside [5, 2^8]", self.d));
        }
        if self.t < 512 {
            out.push(format!("T={} below 2^9", self.t));
        }
        let big_d = self.big_d_value();
        if big_d.bits() < 55 {
            out.push(format!("D={big_d} below 2^54"));
        }
        if !self.big_d.iter().any(|f| f.prime.bits() > 52) {
            out.push("D has no prime factor >= 2^52".into());
        }
        // ceil(lg x) >= 64  <=>  x > 2^63
        if self.ddt() <= BigUint::one() << 63 {
            out.push("ceil(lg dDT) < 64".into());
        }
        out
    }
}

impl fmt::Display for ParameterProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, m={}, n={}, d={}, D={}, T={})",
            self.name,
            match self.kind {
                ProfileKind::Paper => "conforming",
                ProfileKind::Toy => "toy, non-conforming",
            },
            self.m,
            self.n,
            self.d,
            self.big_d_value(),
            self.t
        )
    }
}

fn random_prime<R: Rng + ?Sized>(lo: &BigUint, hi: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let c = random_range(lo, hi, rng);
        if is_probable_prime(&c) {
            return c;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toy_profiles_validate() {
        ParameterProfile::toy24().validate().unwrap();
        ParameterProfile::toy32().validate().unwrap();
        assert!(!ParameterProfile::toy24().published_range_failures().is_empty());
        assert_eq!(ParameterProfile::toy24().small_primes(), vec![2, 3, 5]);
    }

    #[test]
    fn shared_factor_is_rejected() {
        let r = ParameterProfile::custom(
            "bad",
            ProfileKind::Toy,
            24,
            8,
            5,
            vec![Factor::new(11u32, 1)],
            15,
        );
        assert!(matches!(r, Err(ReesseError::Profile(_))));
    }

    #[test]
    fn paper_profile_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let p = ParameterProfile::paper(80, 80, &mut rng).unwrap();
            assert!(p.published_range_failures().is_empty(), "{p}");
            assert!(p.required_bits() + COFACTOR_RESERVE <= 80);
        }
    }
}
