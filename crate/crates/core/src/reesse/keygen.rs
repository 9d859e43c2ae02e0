use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use super::profile::COFACTOR_RESERVE;
use super::{
    AlphaLead, Arith, CommonParams, ExponentBudget, HbarForm, InterpretationConfig,
    ParameterProfile, PrivateKey, PublicKey, ReesseError, TPlacement, WCondition,
};
use crate::juna::draw_levers;
use crate::numeric::{
    element_of_order, factor_small, find_prime_with_divisors, gen_coprime_sequence,
    is_probable_prime, mod_inv, random_range, Factor, FactoredModulus,
};

const STRICT_RETRIES: usize = 64;
const KEY_RETRIES: usize = 1000;

/// How the `∏ p_i^e_i` condition came out for one modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentReport {
    /// `(p_i, e_i)` for every prime below `p_(n/2)`, `e_i` possibly zero.
    pub exponents: Vec<(u64, u32)>,
    /// Length of the leading run `p_1..p_k` that divides `M - 1`.
    pub k: usize,
    /// `∏_{i<=k} e_i`.
    pub product: u64,
    pub target: u64,
    pub budget: ExponentBudget,
}

impl ExponentReport {
    pub fn compute(ctx: &FactoredModulus, profile: &ParameterProfile, budget: ExponentBudget) -> Self {
        let exponents: Vec<(u64, u32)> = profile
            .small_primes()
            .into_iter()
            .map(|p| {
                let e = ctx
                    .factors()
                    .iter()
                    .find(|f| f.prime == BigUint::from(p))
                    .map_or(0, |f| f.exp);
                (p, e)
            })
            .collect();
        let (k, product) = prefix_product(exponents.iter().map(|&(_, e)| e));
        ExponentReport { exponents, k, product, target: profile.exponent_target, budget }
    }

    /// Within a factor two of the target.
    pub fn within_band(&self) -> bool {
        self.product * 2 >= self.target && self.product <= self.target * 2
    }
}

fn prefix_product(exps: impl Iterator<Item = u32>) -> (usize, u64) {
    let mut k = 0;
    let mut prod = 1u64;
    for e in exps {
        if e == 0 {
            break;
        }
        k += 1;
        prod = prod.saturating_mul(e as u64);
    }
    (k, prod)
}

fn factor_u64(x: u64) -> Vec<Factor> {
    factor_small(&BigUint::from(x)).expect("small values factor")
}

/// Exponents of the small primes in `2dDT`.
fn base_exponents(profile: &ParameterProfile, primes: &[u64]) -> Vec<u32> {
    let mut all = vec![Factor::new(2u32, 1)];
    all.extend(factor_u64(profile.d));
    all.extend(factor_u64(profile.t));
    all.extend(profile.big_d.iter().cloned());
    primes
        .iter()
        .map(|&p| all.iter().filter(|f| f.prime == BigUint::from(p)).map(|f| f.exp).sum())
        .collect()
}

/// Chooses extra small-prime powers for `M - 1` within the bits left after
/// `2dDT` and the cofactor reserve.
fn plan_extra(profile: &ParameterProfile, budget: ExponentBudget) -> Result<Vec<Factor>, ReesseError> {
    let primes = profile.small_primes();
    let base = base_exponents(profile, &primes);
    let spare = profile.m.saturating_sub(profile.required_bits() + COFACTOR_RESERVE).min(40);
    let limit = 1u64 << spare;

    // depth-first over smooth numbers below the limit
    let mut best: Option<(u64, Vec<u32>)> = None;
    let mut band: Option<Vec<u32>> = None;
    let mut extra = vec![0u32; primes.len()];
    fn walk(
        i: usize,
        value: u64,
        limit: u64,
        primes: &[u64],
        extra: &mut Vec<u32>,
        visit: &mut dyn FnMut(&[u32]),
    ) {
        if i == primes.len() {
            visit(extra);
            return;
        }
        let mut v = value;
        let mut e = 0;
        loop {
            extra[i] = e;
            walk(i + 1, v, limit, primes, extra, visit);
            match v.checked_mul(primes[i]) {
                Some(nv) if nv < limit => {
                    v = nv;
                    e += 1;
                }
                _ => break,
            }
        }
        extra[i] = 0;
    }
    let target = profile.exponent_target;
    walk(0, 1, limit, &primes, &mut extra, &mut |x| {
        let (_, score) = prefix_product(base.iter().zip(x).map(|(b, e)| b + e));
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, x.to_vec()));
        }
        if band.is_none() && score * 2 >= target && score <= target * 2 {
            band = Some(x.to_vec());
        }
    });
    let chosen = match budget {
        ExponentBudget::Relaxed => best.map(|(_, x)| x).unwrap_or_default(),
        ExponentBudget::Strict => band.ok_or_else(|| {
            ReesseError::Keygen(format!(
                "strict exponent budget infeasible: product of e_i near {target} needs more than the {spare} spare bits of M-1"
            ))
        })?,
    };
    Ok(primes
        .iter()
        .zip(chosen)
        .filter(|(_, e)| *e > 0)
        .map(|(&p, e)| Factor::new(p, e))
        .collect())
}

/// Finds `M` with `2dDT` and the planned small-prime powers dividing `M - 1`.
pub(crate) fn find_modulus<R: Rng + ?Sized>(
    profile: &ParameterProfile,
    budget: ExponentBudget,
    rng: &mut R,
) -> Result<FactoredModulus, ReesseError> {
    let mut required = profile.big_d.clone();
    required.extend(factor_u64(profile.d));
    required.extend(factor_u64(profile.t));
    required.extend(plan_extra(profile, budget)?);
    for _ in 0..STRICT_RETRIES {
        let ctx = find_prime_with_divisors(profile.m, &required, rng)?;
        if budget == ExponentBudget::Relaxed
            || ExponentReport::compute(&ctx, profile, budget).within_band()
        {
            return Ok(ctx);
        }
    }
    Err(ReesseError::Keygen("no modulus met the strict exponent band".into()))
}

/// Largest prime in `[(M-1)/2 - 2^40, (M-1)/2]`.
pub(crate) fn find_sigma(order: &BigUint) -> Result<BigUint, ReesseError> {
    let hi = order / 2u32;
    let window = BigUint::one() << 40u32;
    let lo = if hi > window { &hi - &window } else { BigUint::from(2u32) };
    let mut c = hi;
    while c >= lo {
        if is_probable_prime(&c) {
            return Ok(c);
        }
        c -= 1u32;
    }
    Err(ReesseError::Keygen("no prime near (M-1)/2".into()))
}

/// Exponents of δ in α and β.
pub(crate) fn alpha_beta_exponents(
    w: &BigUint,
    delta: &BigUint,
    sigma: &BigUint,
    t: &BigUint,
    interp: &InterpretationConfig,
    ar: &Arith<'_>,
) -> (BigUint, BigUint) {
    let lead = match interp.alpha_lead {
        AlphaLead::Sigma => ar.e(sigma),
        AlphaLead::DeltaPowSigma => ar.epow(delta, sigma),
    };
    let inner = ar.e(&(lead + delta * ar.epow(w, &(sigma - 1u32))));
    match interp.t_placement {
        TPlacement::Multiplier => (ar.e(&(inner * t)), ar.e(&(ar.epow(w, sigma) * t))),
        TPlacement::Superscript => (ar.epow(&inner, t), ar.epow(w, &(sigma * t))),
    }
}

/// `h̄` from the key material.
pub(crate) fn compute_h_bar(
    a: &[u64],
    w: &BigUint,
    delta: &BigUint,
    s: &BigUint,
    alpha: &BigUint,
    interp: &InterpretationConfig,
    ar: &Arith<'_>,
) -> BigUint {
    let base = match interp.hbar {
        HbarForm::WithSequence => a.iter().fold(w % ar.m, |acc, &x| ar.mul(&acc, &BigUint::from(x))),
        HbarForm::WOnly => w % ar.m,
    };
    let part = ar.pow(&ar.inv(&base), &(delta * s));
    ar.mul(&ar.mul(&part, alpha), &ar.inv(delta))
}

/// `C_i = (A_i W^ℓ(i))^δ`.
pub(crate) fn compute_c(a: &[u64], ell: &[i64], w: &BigUint, delta: &BigUint, ar: &Arith<'_>) -> Vec<BigUint> {
    a.iter()
        .zip(ell)
        .map(|(&ai, &l)| ar.pow(&ar.mul(&BigUint::from(ai), &ar.pow_signed(w, l)), delta))
        .collect()
}

pub(crate) fn w_condition_holds(w: &BigUint, d: &BigUint, big_d: &BigUint, order: &BigUint, interp: &InterpretationConfig) -> bool {
    match interp.w_condition {
        WCondition::SmallDivisors => !w.gcd(&(d * big_d)).is_one(),
        WCondition::GroupOrder => !w.gcd(order).is_one(),
    }
}

/// Generates `(public, private, common)` under `interp`.
///
/// Besides the printed conditions, `W` is kept coprime to `d`; otherwise
/// `d | WQ` for every `Q` and signing could never finish.
pub fn keygen<R: Rng + ?Sized>(
    profile: &ParameterProfile,
    interp: &InterpretationConfig,
    rng: &mut R,
) -> Result<(PublicKey, PrivateKey, CommonParams), ReesseError> {
    profile.validate()?;
    let a = gen_coprime_sequence(profile.n, profile.a_bound, rng)?;
    let ell = draw_levers(profile.n, profile.n as u64, rng);
    let ctx = find_modulus(profile, interp.exponent_budget, rng)?;
    let order = ctx.order().clone();
    let modulus = ctx.modulus().clone();

    let s_hi = BigUint::from((1u64 << profile.s_inv_bits) - 1).min(&order - 1u32);
    let s_inv = loop {
        let c = random_range(&BigUint::from(2u32), &s_hi, rng);
        if c.gcd(&order).is_one() {
            break c;
        }
    };
    let s = mod_inv(&s_inv, &order).expect("coprime");
    let sigma = find_sigma(&order)?;
    let t = BigUint::from(profile.t);
    let d = BigUint::from(profile.d);
    let big_d = profile.big_d_value();
    let ddt = profile.ddt();

    let common = CommonParams { sigma, n: profile.n, s, t, ctx, interp: *interp };
    let ar = Arith::new(&common, interp);
    let two = BigUint::from(2u32);
    let below_order = &order - 1u32;

    for _ in 0..KEY_RETRIES {
        let w = random_range(&two, &below_order, rng);
        if !w_condition_holds(&w, &d, &big_d, &order, interp) || !w.gcd(&d).is_one() {
            continue;
        }
        let delta = element_of_order(&ddt, &common.ctx, rng)?;
        if !delta.gcd(&order).is_one() || delta >= order || delta <= BigUint::one() {
            continue;
        }
        let (ae, be) = alpha_beta_exponents(&w, &delta, &common.sigma, &common.t, interp, &ar);
        let alpha = ar.pow(&delta, &ae);
        let beta = ar.pow(&delta, &be);
        let h_bar = compute_h_bar(a.items(), &w, &delta, &common.s, &alpha, interp, &ar);
        let c = compute_c(a.items(), &ell, &w, &delta, &ar);
        if ![&alpha, &beta, &h_bar].iter().all(|x| ar.in_range(x)) || !c.iter().all(|x| ar.in_range(x)) {
            continue;
        }
        let public = PublicKey { c, alpha, beta };
        let private = PrivateKey {
            a: a.clone(),
            ell: ell.clone(),
            w,
            delta,
            big_d: big_d.clone(),
            d: d.clone(),
            h_bar,
        };
        debug_assert!(modulus.bits() == profile.m);
        return Ok((public, private, common));
    }
    Err(ReesseError::Keygen(format!("no admissible W, δ after {KEY_RETRIES} draws")))
}

/// Exponent bound used by the auditor for `S^-1`.
pub(crate) fn s_inverse_small(common: &CommonParams) -> Option<u64> {
    common.s_inverse().and_then(|x| x.to_u64()).filter(|x| !x.is_zero() && *x < 1 << 16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn toy_keygen_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ParameterProfile::toy24();
        let (pk, sk, common) = keygen(&p, &InterpretationConfig::reconciled(), &mut rng).unwrap();
        assert_eq!(common.m(), 24);
        assert_eq!(pk.c.len(), 8);
        assert_eq!(sk.ell.len(), 8);
        assert!((common.order() % p.ddt()).is_zero());
    }

    #[test]
    fn sigma_is_largest_prime_below_half() {
        let order = BigUint::from(1_000_002u32);
        let s = find_sigma(&order).unwrap();
        // oracle: scan downward with trial division
        let naive = (2..=500_001u64)
            .rev()
            .find(|&x| (2..).take_while(|p| p * p <= x).all(|p| x % p != 0))
            .unwrap();
        assert_eq!(s, BigUint::from(naive));
    }

    #[test]
    fn strict_budget_is_infeasible_at_80_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ParameterProfile::paper(80, 80, &mut rng).unwrap();
        assert!(matches!(plan_extra(&p, ExponentBudget::Strict), Err(ReesseError::Keygen(_))));
        assert!(plan_extra(&p, ExponentBudget::Relaxed).is_ok());
    }

    #[test]
    fn strict_budget_toy_band() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = ParameterProfile::toy32();
        let ctx = find_modulus(&p, ExponentBudget::Strict, &mut rng).unwrap();
        assert!(ExponentReport::compute(&ctx, &p, ExponentBudget::Strict).within_band());
    }
}
