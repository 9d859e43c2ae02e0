use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::keygen::{
    alpha_beta_exponents, compute_c, compute_h_bar, s_inverse_small, w_condition_holds,
    ExponentReport,
};
use super::{Arith, CommonParams, ParameterProfile, PrivateKey, ProfileKind, PublicKey};
use crate::numeric::{element_order, is_probable_prime};

/// One re-checked condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditEntry {
    /// Generation step the condition belongs to (`S1`..`S6`, `output`).
    pub step: &'static str,
    pub name: String,
    pub pass: bool,
    /// Recomputed values.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuditReport {
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    fn push(&mut self, step: &'static str, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.entries.push(AuditEntry { step, name: name.into(), pass, detail: detail.into() });
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{}\t{}\t{}\t{}",
                if e.pass { "pass" } else { "FAIL" },
                e.step,
                e.name,
                e.detail
            )?;
        }
        Ok(())
    }
}

/// Re-verifies every generation condition from the key material alone.
pub fn constraint_audit(
    public: &PublicKey,
    private: &PrivateKey,
    common: &CommonParams,
    profile: &ParameterProfile,
) -> AuditReport {
    let mut r = AuditReport::default();
    let interp = &common.interp;
    let ar = Arith::new(common, interp);
    let m = common.modulus();
    let ord = common.order();
    let n = common.n;
    let (d, big_d, t) = (&private.d, &private.big_d, &common.t);
    let one = BigUint::one();

    // S1
    let pairwise = d.gcd(big_d).is_one() && d.gcd(t).is_one() && big_d.gcd(t).is_one();
    r.push("S1", "d, D, T pairwise coprime", pairwise, format!("d={d} D={big_d} T={t}"));
    r.push(
        "S1",
        "d, D, T match the profile",
        d == &BigUint::from(profile.d) && big_d == &profile.big_d_value() && t == &BigUint::from(profile.t),
        profile.to_string(),
    );
    let failures = profile.published_range_failures();
    match profile.kind {
        ProfileKind::Paper => r.push("S1", "published parameter ranges", failures.is_empty(), failures.join("; ")),
        ProfileKind::Toy => r.push(
            "S1",
            "published parameter ranges (toy profile, not required)",
            true,
            format!("non-conforming: {}", failures.join("; ")),
        ),
    }
    r.push(
        "S1",
        "A is a coprime sequence in {2..863}",
        private.a.is_valid() && private.a.bound() <= 863 && private.a.len() == n,
        format!("{:?}", private.a.items()),
    );

    // S2
    r.push("S2", "M prime", is_probable_prime(m), format!("M={m:x}"));
    r.push(
        "S2",
        "ceil(lg M) = m",
        m.bits() == profile.m,
        format!("bits={} m={}", m.bits(), profile.m),
    );
    r.push("S2", "factorization of M-1 consistent", common.ctx.is_consistent() && {
        common.ctx.factors().iter().fold(BigUint::one(), |a, f| a * f.value()) == *ord
    }, format!("{} prime powers", common.ctx.factors().len()));
    let ddt = d * big_d * t;
    r.push("S2", "dDT | M-1", (ord % &ddt).is_zero(), format!("dDT={ddt}"));
    let er = ExponentReport::compute(&common.ctx, profile, interp.exponent_budget);
    let exps = er
        .exponents
        .iter()
        .map(|(p, e)| format!("{p}^{e}"))
        .collect::<Vec<_>>()
        .join(" ");
    let p_half = profile.first_half_primes().last().copied().unwrap_or(2);
    let strict = interp.exponent_budget == super::ExponentBudget::Strict;
    r.push(
        "S2",
        "prod p_i^e_i | M-1 with p_k < p_(n/2)",
        er.exponents.iter().take(er.k).all(|&(p, _)| p < p_half),
        format!("k={} p_(n/2)={p_half} {exps}", er.k),
    );
    r.push(
        "S2",
        if strict { "prod e_i near target (strict)" } else { "prod e_i maximized in spare bits (relaxed)" },
        !strict || er.within_band(),
        format!("prod e_i={} target={}", er.product, er.target),
    );
    r.push(
        "S2",
        "S in (1, M-1), gcd(S, M-1) = 1",
        common.s > one && &common.s < ord && common.s.gcd(ord).is_one(),
        format!("S={:x}", common.s),
    );
    r.push(
        "S2",
        "S^-1 mod (M-1) small",
        s_inverse_small(common).is_some(),
        format!("S^-1={:?}", common.s_inverse().map(|x| x.to_string())),
    );

    // S3
    let w = &private.w;
    let delta = &private.delta;
    r.push("S3", "W in (1, M-1)", w > &one && w < ord, format!("W={w:x}"));
    r.push(
        "S3",
        format!("gcd(W, {}) > 1", match interp.w_condition {
            super::WCondition::SmallDivisors => "dD",
            super::WCondition::GroupOrder => "M-1",
        }),
        w_condition_holds(w, d, big_d, ord, interp),
        format!("gcd(W, dD)={}", w.gcd(&(d * big_d))),
    );
    r.push("S3", "d does not divide W", !(w % d).is_zero(), format!("W mod d={}", w % d));
    r.push("S3", "delta in (1, M-1)", delta > &one && delta < ord, format!("delta={delta:x}"));
    r.push("S3", "gcd(delta, M-1) = 1", delta.gcd(ord).is_one(), format!("gcd={}", delta.gcd(ord)));
    let order = element_order(delta, &common.ctx).unwrap_or_default();
    r.push("S3", "order of delta = dDT", order == ddt, format!("order={order} dDT={ddt}"));

    // S4
    let sigma = &common.sigma;
    let half = ord / 2u32;
    let window = BigUint::one() << 40u32;
    r.push(
        "S4",
        "sigma prime in [(M-1)/2 - 2^40, (M-1)/2]",
        is_probable_prime(sigma) && sigma <= &half && sigma + &window >= half,
        format!("sigma={sigma:x}"),
    );
    let (ae, be) = alpha_beta_exponents(w, delta, sigma, t, interp, &ar);
    let alpha = ar.pow(delta, &ae);
    let beta = ar.pow(delta, &be);
    r.push("S4", "alpha recomputed", alpha == public.alpha, format!("alpha={:x}", public.alpha));
    r.push("S4", "beta recomputed", beta == public.beta, format!("beta={:x}", public.beta));
    let h_bar = compute_h_bar(private.a.items(), w, delta, &common.s, &public.alpha, interp, &ar);
    r.push("S4", "h_bar recomputed", h_bar == private.h_bar, format!("h_bar={:x}", private.h_bar));
    r.push(
        "S4",
        "alpha, beta in (1, M)",
        ar.in_range(&public.alpha) && ar.in_range(&public.beta),
        String::new(),
    );

    // S5
    let mut seen = HashSet::new();
    let distinct = private.ell.iter().all(|l| seen.insert(*l));
    r.push("S5", "ell pairwise distinct", distinct, format!("{:?}", private.ell));
    let omega_max = 2 * n as i64 + 3;
    let in_omega = private
        .ell
        .iter()
        .all(|l| l.unsigned_abs() % 2 == 1 && (5..=omega_max as u64).contains(&l.unsigned_abs()));
    let mut mags = HashSet::new();
    let one_sign = private.ell.iter().all(|l| mags.insert(l.unsigned_abs()));
    r.push(
        "S5",
        "ell in Omega = {+-5, ..., +-(2n+3)}",
        in_omega && one_sign,
        format!("2n+3={omega_max}"),
    );

    // S6
    let c = if private.a.len() == private.ell.len() {
        compute_c(private.a.items(), &private.ell, w, delta, &ar)
    } else {
        Vec::new()
    };
    let mismatched: Vec<usize> = (0..n)
        .filter(|&i| c.get(i) != public.c.get(i))
        .map(|i| i + 1)
        .collect();
    r.push(
        "S6",
        "C_i = (A_i W^ell(i))^delta",
        mismatched.is_empty(),
        if mismatched.is_empty() { String::new() } else { format!("mismatch at {mismatched:?}") },
    );
    r.push("S6", "C_i in (1, M)", public.c.iter().all(|x| ar.in_range(x)), String::new());

    // output
    r.push(
        "output",
        "lengths of C, A, ell equal n",
        public.c.len() == n && private.a.len() == n && private.ell.len() == n,
        format!("n={n}"),
    );
    r.push(
        "output",
        "h_bar in (1, M)",
        ar.in_range(&private.h_bar),
        String::new(),
    );
    r
}

/// The checks that need only public material: what a platform can confirm
/// about a key it is asked to register.
pub fn public_key_audit(public: &PublicKey, common: &CommonParams) -> AuditReport {
    let mut r = AuditReport::default();
    let ar = Arith::new(common, &common.interp);
    let m = common.modulus();
    let ord = common.order();
    let one = BigUint::one();
    r.push("S2", "M prime", is_probable_prime(m), format!("M={m:x}"));
    r.push("S2", "factorization of M-1 consistent", common.ctx.is_consistent() && {
        common.ctx.factors().iter().fold(BigUint::one(), |a, f| a * f.value()) == *ord
    }, format!("{} prime powers", common.ctx.factors().len()));
    r.push("S2", "T | M-1", common.t > one && (ord % &common.t).is_zero(), format!("T={}", common.t));
    r.push(
        "S2",
        "S in (1, M-1), gcd(S, M-1) = 1",
        common.s > one && &common.s < ord && common.s.gcd(ord).is_one(),
        format!("S={:x}", common.s),
    );
    let half = ord / 2u32;
    let window = BigUint::one() << 40u32;
    r.push(
        "S4",
        "sigma prime in [(M-1)/2 - 2^40, (M-1)/2]",
        is_probable_prime(&common.sigma) && common.sigma <= half && &common.sigma + &window >= half,
        format!("sigma={:x}", common.sigma),
    );
    r.push(
        "S4",
        "alpha, beta in (1, M)",
        ar.in_range(&public.alpha) && ar.in_range(&public.beta),
        String::new(),
    );
    r.push("S6", "C_i in (1, M)", public.c.iter().all(|x| ar.in_range(x)), String::new());
    let mut seen = HashSet::new();
    r.push("S6", "C_i pairwise distinct", public.c.iter().all(|x| seen.insert(x)), String::new());
    r.push(
        "output",
        "length of C equals n, n even",
        public.c.len() == common.n && common.n.is_multiple_of(2) && common.n > 0,
        format!("n={}", common.n),
    );
    r
}
