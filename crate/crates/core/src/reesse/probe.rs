use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;

use super::keygen::alpha_beta_exponents;
use super::{
    constraint_audit, keygen, sign_with_transcript, verify, Arith, CommonParams,
    InterpretationConfig, ParameterProfile, PrivateKey, PublicKey, ReesseError, SigningTranscript,
    VerificationTranscript,
};
use crate::digest::Sha256Digest;

/// Results for one `(profile, variant)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeRow {
    pub profile: String,
    pub variant: String,
    pub interp: InterpretationConfig,
    pub trials: usize,
    pub accepted: usize,
    pub sign_failures: usize,
    /// Key audit passed.
    pub audit_pass: bool,
    /// Every signing transcript met its side conditions.
    pub transcript_pass: bool,
    /// Most frequent first divergent quantity among rejections, `-` if none.
    pub first_divergence: String,
}

impl ProbeRow {
    pub fn accept_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.accepted as f64 / self.trials as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
}

const HEADER: &str = "profile\tvariant\ttrials\taccepted\taccept_rate\tsign_failures\taudit_pass\ttranscript_pass\tfirst_divergence\tinterp";

impl ProbeReport {
    /// Tab-separated, one row per `(profile, variant)`, with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.4}\t{}\t{}\t{}\t{}\t{}",
                r.profile,
                r.variant,
                r.trials,
                r.accepted,
                r.accept_rate(),
                r.sign_failures,
                r.audit_pass,
                r.transcript_pass,
                r.first_divergence,
                r.interp
            );
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, ReesseError> {
        let bad = |line: &str| ReesseError::Format(format!("probe report line {line:?}"));
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            return Err(ReesseError::Format("probe report header".into()));
        }
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 10 {
                return Err(bad(line));
            }
            rows.push(ProbeRow {
                profile: f[0].into(),
                variant: f[1].into(),
                trials: f[2].parse().map_err(|_| bad(line))?,
                accepted: f[3].parse().map_err(|_| bad(line))?,
                sign_failures: f[5].parse().map_err(|_| bad(line))?,
                audit_pass: f[6].parse().map_err(|_| bad(line))?,
                transcript_pass: f[7].parse().map_err(|_| bad(line))?,
                first_divergence: f[8].into(),
                interp: f[9].parse().map_err(|_| bad(line))?,
            });
        }
        Ok(ProbeReport { rows })
    }
}

/// Localizes why `X != Y` by re-expanding both sides term by term.
/// Returns `None` when every partial identity holds.
pub fn first_divergence(
    public: &PublicKey,
    private: &PrivateKey,
    common: &CommonParams,
    st: &SigningTranscript,
    vt: &VerificationTranscript,
) -> Option<&'static str> {
    let interp = &common.interp;
    let ar = Arith::new(common, interp);
    let (w, delta) = (&private.w, &private.delta);

    if ar.mul(&vt.g1_bar, &st.g0) != ar.pow(w, &st.k_bar) {
        return Some("G1*G0 = W^k");
    }
    let w_part = ar.pow(&ar.inv(w), &(delta * &common.s));
    if ar.mul(delta, &private.h_bar) != ar.mul(&public.alpha, &w_part) {
        return Some("delta*h_bar = alpha*W^(-delta*S)");
    }
    let rust = BigUint::from(st.r) * &st.u * &common.s * &common.t;
    if vt.y1 != ar.mul(&vt.x1, &ar.pow(&ar.inv(&st.g_bar), &rust)) {
        return Some("Y1 = X1*g_bar^(-rUST)");
    }
    // δ^Δ must be 1, with Δ = a·Q^σ̄ + āD·rUST - b·(HQ^(σ̄-1) + H^σ̄)
    let (ae, be) = alpha_beta_exponents(w, delta, &common.sigma, &common.t, interp, &ar);
    let q = &st.q;
    let plus = ar.e(&(ae * ar.epow(q, &common.sigma) + &st.a_bar * &private.big_d * &rust));
    let minus = ar.e(
        &(be * (&st.h * ar.epow(q, &(&common.sigma - 1u32)) + ar.epow(&st.h, &common.sigma))),
    );
    let balance = (plus + &ar.ered - minus) % &ar.ered;
    if !(&balance % (&private.big_d * &common.t)).is_zero() {
        return Some("exponent balance mod DT");
    }
    if !(&balance % &private.d).is_zero() {
        return Some("exponent balance mod d (loop exit)");
    }
    None
}

/// Runs keygen, sign and verify for every `(profile, variant)` pair on
/// `trials` random messages.
///
/// Needs at least four variants, one of them the typeset reading.
pub fn roundtrip_probe<R: Rng + ?Sized>(
    profiles: &[ParameterProfile],
    variants: &[(String, InterpretationConfig)],
    trials: usize,
    rng: &mut R,
) -> Result<ProbeReport, ReesseError> {
    if variants.len() < 4 {
        return Err(ReesseError::Probe(format!("need at least 4 variants, got {}", variants.len())));
    }
    if !variants.iter().any(|(_, v)| *v == InterpretationConfig::as_printed()) {
        return Err(ReesseError::Probe("the as-printed variant must be included".into()));
    }
    if profiles.is_empty() {
        return Err(ReesseError::Probe("no profiles".into()));
    }
    let mut report = ProbeReport::default();
    for profile in profiles {
        for (name, interp) in variants {
            let mut row = ProbeRow {
                profile: profile.name.clone(),
                variant: name.clone(),
                interp: *interp,
                trials,
                accepted: 0,
                sign_failures: 0,
                audit_pass: false,
                transcript_pass: true,
                first_divergence: "-".into(),
            };
            let (pk, sk, common) = match keygen(profile, interp, rng) {
                Ok(k) => k,
                Err(e) => {
                    row.first_divergence = format!("keygen: {e}").replace('\t', " ");
                    row.transcript_pass = false;
                    report.rows.push(row);
                    continue;
                }
            };
            row.audit_pass = constraint_audit(&pk, &sk, &common, profile).passed();
            let hash = Sha256Digest { bits: common.n };
            let mut divergences: BTreeMap<&'static str, usize> = BTreeMap::new();
            for _ in 0..trials {
                let mut msg = [0u8; 16];
                rng.fill(&mut msg);
                let st = match sign_with_transcript(&sk, &common, &msg, &hash, interp, rng) {
                    Ok(t) => t,
                    Err(_) => {
                        row.sign_failures += 1;
                        *divergences.entry("sign: retry budget").or_default() += 1;
                        continue;
                    }
                };
                if !st.side_conditions(&sk, &common).iter().all(|(_, ok)| *ok) {
                    row.transcript_pass = false;
                }
                let v = verify(&pk, &common, &msg, &st.signature(), &hash, interp)?;
                if v.accepted {
                    row.accepted += 1;
                } else {
                    let what = match &v.transcript {
                        Some(vt) => first_divergence(&pk, &sk, &common, &st, vt).unwrap_or("unlocalized"),
                        None => "range",
                    };
                    *divergences.entry(what).or_default() += 1;
                }
            }
            if let Some((what, _)) = divergences.iter().max_by_key(|(_, c)| **c) {
                row.first_divergence = (*what).to_string();
            }
            report.rows.push(row);
        }
    }
    Ok(report)
}

/// The first variant accepted in every trial on every profile.
pub fn select_interpretation(report: &ProbeReport) -> Option<(String, InterpretationConfig)> {
    let mut order: Vec<&str> = Vec::new();
    for r in &report.rows {
        if !order.contains(&r.variant.as_str()) {
            order.push(&r.variant);
        }
    }
    order.into_iter().find_map(|v| {
        let rows: Vec<&ProbeRow> = report.rows.iter().filter(|r| r.variant == v).collect();
        rows.iter()
            .all(|r| r.trials > 0 && r.accepted == r.trials)
            .then(|| (v.to_string(), rows[0].interp))
    })
}
