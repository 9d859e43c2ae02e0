//! The acceptance suite: thirteen criteria, each run against its time limit
//! and reported on one line. Exits nonzero if any criterion fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use bfid_core::bits::BitString;
use bfid_core::codec::{confect_bfid, Bfid, Mode, ObjectKind, ObjectProfile};
use bfid_core::digest::Sha256Digest;
use bfid_core::juna::{
    bit_long_shadow, bit_shadow, hash_compress, hash_init, random_message, HashConfig, HashInitValue,
};
use bfid_core::netapps::{check_dynamic_password, gen_dynamic_password, Ipv6PlusAddress, Layout, LoginContext};
use bfid_core::platform::{frames, AlertReason, Platform, PlatformConfig, Verdict};
use bfid_core::reesse::{
    constraint_audit, keygen, sign, verify, ExponentBudget, InterpretationConfig, KeyFile, ParameterProfile,
    ProbeReport, Signature,
};
use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

fn digits(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect()
}

fn c1_bit_shadow() -> Outcome {
    let got = digits(bit_shadow(&bits("01010100")).map_err(|e| e.to_string())?.values());
    check(got == "04020200", format!("got {got}"))?;
    Ok(got)
}

fn c2_long_shadow() -> Outcome {
    let got = digits(&bit_long_shadow(&bits("01010100")).map_err(|e| e.to_string())?);
    check(got == "08020400", format!("got {got}"))?;
    Ok(got)
}

fn c3_shadow_sum() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sizes = [8usize, 16, 32, 64, 128];
    for k in 0..10_000 {
        let n = sizes[k % sizes.len()];
        let b = random_message(n, &mut rng);
        let sum: u32 = bit_shadow(&b).map_err(|e| e.to_string())?.values().iter().sum();
        check(sum as usize == n, format!("shadows of {b} sum to {sum}"))?;
    }
    Ok("10000 strings".into())
}

/// The definition applied literally: long-shadow exponents from position
/// rules, powers by repeated multiplication.
fn juna_oracle(iv: &HashInitValue, b: &BitString) -> BigUint {
    let n = b.len();
    let first = (0..n).find(|&i| b.get(i)).unwrap();
    let last = (0..n).rev().find(|&i| b.get(i)).unwrap();
    let mut acc = BigUint::one();
    for i in 0..n {
        if !b.get(i) {
            continue;
        }
        let mut e = 1 + (0..i).rev().take_while(|&j| !b.get(j)).count();
        if i == first {
            e += n - 1 - last;
        }
        let partner = if i < n / 2 { i + n / 2 } else { i - n / 2 };
        if b.get(partner) {
            e *= 2;
        }
        for _ in 0..e {
            acc = acc * &iv.c()[i] % iv.modulus();
        }
    }
    acc
}

fn c4_juna_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let iv = hash_init(&HashConfig::toy(20, 8, 31, 8).map_err(|e| e.to_string())?, &mut rng)
        .map_err(|e| e.to_string())?;
    for _ in 0..1000 {
        let b = random_message(8, &mut rng);
        let d = hash_compress(&iv, &b).map_err(|e| e.to_string())?;
        check(d == juna_oracle(&iv, &b), format!("mismatch on {b}"))?;
    }
    Ok(format!("1000 messages, M={} ({} bits)", iv.modulus(), iv.m()))
}

fn c5_hash_init_paper() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let iv = hash_init(&HashConfig::paper_80(), &mut rng).map_err(|e| e.to_string())?;
    let failed: Vec<String> = iv.audit().into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
    check(failed.is_empty(), format!("audit failures: {}", failed.join("; ")))?;
    check(iv.m() == 80 && iv.n() == 80, "wrong dimensions")?;
    Ok(format!("m=80 n=80, {} audit checks", iv.audit().len()))
}

fn c6_keygen_audit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let interp = InterpretationConfig::reconciled();
    let t = Instant::now();
    let profile = ParameterProfile::paper(80, 80, &mut rng).map_err(|e| e.to_string())?;
    let (pk, sk, c) = keygen(&profile, &interp, &mut rng).map_err(|e| e.to_string())?;
    let report = constraint_audit(&pk, &sk, &c, &profile);
    let failed: Vec<String> = report.failures().map(|f| format!("{} {}", f.step, f.name)).collect();
    check(report.passed(), format!("paper audit failures: {}", failed.join("; ")))?;
    let paper_time = t.elapsed();
    check(paper_time <= Duration::from_secs(300), "paper keygen over 5 min")?;
    let strict = InterpretationConfig { exponent_budget: ExponentBudget::Strict, ..interp };
    let t = Instant::now();
    for p in [ParameterProfile::toy24(), ParameterProfile::toy32()] {
        let (pk, sk, c) = keygen(&p, &strict, &mut rng).map_err(|e| format!("{}: {e}", p.name))?;
        let r = constraint_audit(&pk, &sk, &c, &p);
        let failed: Vec<String> = r.failures().map(|f| format!("{} {}", f.step, f.name)).collect();
        check(r.passed(), format!("{} strict audit failures: {}", p.name, failed.join("; ")))?;
    }
    let toy_time = t.elapsed();
    check(toy_time <= Duration::from_secs(5), "toy keygen over 5 s")?;
    Ok(format!(
        "paper m=80 n=80 relaxed {:.2?}, {} checks; toy24+toy32 strict {:.2?}",
        paper_time,
        report.entries.len(),
        toy_time
    ))
}

fn c7_sizes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let interp = InterpretationConfig::reconciled();
    let profile = ParameterProfile::paper(80, 80, &mut rng).map_err(|e| e.to_string())?;
    let (_, sk, c) = keygen(&profile, &interp, &mut rng).map_err(|e| e.to_string())?;
    let h = Sha256Digest { bits: c.n };
    let sig = sign(&sk, &c, b"size check", &h, &interp, &mut rng).map_err(|e| e.to_string())?;
    let packed = sig.pack(c.m()).ok_or("signature does not pack")?;
    check(packed.len() == 160, format!("packed signature is {} bits", packed.len()))?;
    let item = ObjectProfile::new(ObjectKind::Merchandise, "acme").with("serial", "1").unwrap();
    let conf = confect_bfid(&sk, &c, &item, &h, Mode::Escrow, &interp, &mut rng).map_err(|e| e.to_string())?;
    check(conf.bfid.len() == 16, format!("escrow identity is {} symbols", conf.bfid.len()))?;
    Ok(format!("160 bits, escrow identity {} ({} symbols)", conf.bfid, conf.bfid.len()))
}

fn c8_tamper() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let interp = InterpretationConfig::reconciled();
    let p = ParameterProfile::toy32();
    let (pk, sk, c) = keygen(&p, &interp, &mut rng).map_err(|e| e.to_string())?;
    let (pk2, _, c2) = keygen(&p, &interp, &mut rng).map_err(|e| e.to_string())?;
    let h = Sha256Digest { bits: c.n };
    let m = c.m();
    let (mut tamper_rej, mut cross_rej) = (0, 0);
    for k in 0..1000 {
        let mut msg = [0u8; 16];
        rng.fill(&mut msg);
        let sig = sign(&sk, &c, &msg, &h, &interp, &mut rng).map_err(|e| e.to_string())?;
        // Alternate between flipping a message bit and a signature bit.
        let accepted = if k % 2 == 0 {
            let bit = rng.gen_range(0..128);
            msg[bit / 8] ^= 1 << (bit % 8);
            let v = verify(&pk, &c, &msg, &sig, &h, &interp).map_err(|e| e.to_string())?;
            msg[bit / 8] ^= 1 << (bit % 8);
            v.accepted
        } else {
            let mut packed = sig.pack(m).unwrap();
            packed.flip(rng.gen_range(0..packed.len()));
            let t = Signature::unpack(&packed, m).unwrap();
            verify(&pk, &c, &msg, &t, &h, &interp).map_err(|e| e.to_string())?.accepted
        };
        if !accepted {
            tamper_rej += 1;
        }
        if !verify(&pk2, &c2, &msg, &sig, &h, &interp).map_err(|e| e.to_string())?.accepted {
            cross_rej += 1;
        }
    }
    let detail = format!("tamper rejected {tamper_rej}/1000, cross-key rejected {cross_rej}/1000");
    check(tamper_rej >= 999 && cross_rej >= 999, detail.clone())?;
    Ok(detail)
}

fn c9_probe() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let variants = InterpretationConfig::probe_variants();
    let profiles = [ParameterProfile::toy24(), ParameterProfile::toy32()];
    let report =
        bfid_core::reesse::roundtrip_probe(&profiles, &variants, 100, &mut rng).map_err(|e| e.to_string())?;
    check(variants.len() >= 4, "fewer than 4 variants")?;
    check(report.rows.len() == variants.len() * profiles.len(), "missing rows")?;
    for r in &report.rows {
        check(r.trials == 100, format!("{}/{}: {} trials", r.profile, r.variant, r.trials))?;
        check(r.audit_pass, format!("{}/{}: key fails constraint audit", r.profile, r.variant))?;
        if r.accepted < r.trials {
            let localized = r.first_divergence != "-" && r.first_divergence != "unlocalized";
            check(localized, format!("{}/{}: divergence not localized", r.profile, r.variant))?;
        }
    }
    let reparsed = ProbeReport::from_tsv(&report.to_tsv()).map_err(|e| e.to_string())?;
    check(reparsed == report, "report does not re-read")?;
    // Re-verify the report's keys independently: regenerate under each
    // variant and audit again.
    for (name, interp) in &variants {
        for p in &profiles {
            let (pk, sk, c) = keygen(p, interp, &mut rng).map_err(|e| e.to_string())?;
            check(constraint_audit(&pk, &sk, &c, p).passed(), format!("{}/{name}: re-audit failed", p.name))?;
        }
    }
    let full: Vec<&str> = {
        let mut v: Vec<&str> = variants
            .iter()
            .map(|(n, _)| n.as_str())
            .filter(|n| report.rows.iter().filter(|r| r.variant == *n).all(|r| r.accepted == r.trials))
            .collect();
        v.dedup();
        v
    };
    let printed: Vec<String> = report
        .rows
        .iter()
        .filter(|r| r.variant == "as-printed")
        .map(|r| format!("{} {:.2} at {:?}", r.profile, r.accept_rate(), r.first_divergence))
        .collect();
    Ok(format!(
        "{} variants x {} profiles x 100; as-printed: {}; accept rate 1.0: {}",
        variants.len(),
        profiles.len(),
        printed.join(", "),
        if full.is_empty() { "none".to_string() } else { full.join(", ") }
    ))
}

struct Issuer {
    sk: bfid_core::reesse::PrivateKey,
    c: bfid_core::reesse::CommonParams,
    public_text: String,
}

fn issuer(seed: u64) -> Result<Issuer, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pk, sk, c) = keygen(&ParameterProfile::toy32(), &InterpretationConfig::reconciled(), &mut rng)
        .map_err(|e| e.to_string())?;
    let public_text = KeyFile { common: c.clone(), public: Some(pk), private: None }.to_text();
    Ok(Issuer { sk, c, public_text })
}

fn registered(p: &Platform, who: &Issuer, serials: &[u32], rng: &mut ChaCha8Rng) -> Result<Vec<(Bfid, String)>, String> {
    let req = frames::register_subject("acme", &who.public_text, &who.sk, &who.c, rng).map_err(|e| e.to_string())?;
    let r = p.handle_line(&req.to_frame());
    check(r == "OK REGISTERED acme", format!("register subject: {r}"))?;
    let mut out = Vec::new();
    for &s in serials {
        let item = ObjectProfile::new(ObjectKind::Merchandise, "acme").with("serial", s.to_string()).unwrap();
        let conf = confect_bfid(&who.sk, &who.c, &item, &Sha256Digest { bits: who.c.n }, Mode::Escrow, &who.c.interp, rng)
            .map_err(|e| e.to_string())?;
        let req = frames::register_id(&conf, "acme", &who.sk, &who.c, rng).map_err(|e| e.to_string())?;
        let r = p.handle_line(&req.to_frame());
        check(r.starts_with("OK REGISTERED"), format!("register id: {r}"))?;
        out.push((conf.bfid.clone(), conf.escrow.digest_hex()));
    }
    Ok(out)
}

fn c10_platform() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("platform.log");
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let who = issuer(11)?;
    let snapshot = {
        let p = Platform::open(&log, PlatformConfig::default()).map_err(|e| e.to_string())?;
        let ids = registered(&p, &who, &[1, 2], &mut rng)?;
        let (b, _) = &ids[0];
        let (_, other_digest) = &ids[1];
        let r = p.handle_line(&format!("VERIFY {b}"));
        check(r == "OK ACCEPT \"merchandise from acme: serial=1\"", format!("genuine: {r}"))?;
        let r = p.handle_line("VERIFY 0000000000000");
        check(r == "OK UNKNOWN", format!("unknown: {r}"))?;
        let r = p.handle_line(&format!("VERIFY {b} {other_digest}"));
        check(r == "OK REJECT", format!("mismatched digest: {r}"))?;
        p.snapshot()
    };
    let reopened = Platform::open(&log, PlatformConfig::default()).map_err(|e| e.to_string())?;
    check(reopened.snapshot() == snapshot, "replayed state differs")?;
    Ok(format!("ACCEPT/UNKNOWN/REJECT, {} log entries replayed identically", reopened.seq()))
}

fn alerts_valid(p: &Platform, expect: AlertReason, verdict: Verdict) -> Result<String, String> {
    let alerts = p.scan(86_400);
    check(alerts.len() == 1, format!("{} alerts: {alerts:?}", alerts.len()))?;
    let a = &alerts[0];
    check(a.reason == expect, format!("reason {}", a.reason))?;
    let obs = p.observations();
    for seq in &a.evidence {
        check(
            obs.iter().any(|o| o.seq == *seq && o.bfid == a.bfid && o.verdict == verdict),
            format!("evidence {seq} does not reference a {verdict} observation"),
        )?;
    }
    Ok(a.to_string())
}

fn c11_fraud() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let who = issuer(13)?;

    let p = Platform::in_memory(PlatformConfig::default());
    let ids = registered(&p, &who, &[1], &mut rng)?;
    let b = ids[0].0.text();
    p.handle_line(&format!("VERIFY {b} region=east ts=1000"));
    p.handle_line(&format!("VERIFY {b} region=west ts=4600"));
    let overlap = alerts_valid(&p, AlertReason::RepeatVerifyOverlap, Verdict::Accept)?;

    let p = Platform::in_memory(PlatformConfig::default());
    let ids = registered(&p, &who, &[1, 2], &mut rng)?;
    let b = ids[0].0.text();
    for i in 0..10 {
        let r = p.handle_line(&format!("VERIFY {b} {} region=east ts={}", ids[1].1, 100 + i));
        check(r == "OK REJECT", format!("burst verify: {r}"))?;
    }
    let burst = alerts_valid(&p, AlertReason::VerifyFailureBurst, Verdict::Reject)?;
    Ok(format!("{overlap}; {burst}"))
}

fn c12_ipv6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let example = Ipv6PlusAddress::new(86, 0x0a0b_0c0d, 0x7f, 0x1234_5678_9abc_def0_1122, Layout::new(32, 8).unwrap())
        .map_err(|e| e.to_string())?;
    let v = example.pack().map_err(|e| e.to_string())?;
    check(Ipv6PlusAddress::parse(v, example.layout) == example && v >> 120 == 86, "nation 86 example")?;
    for (r, s) in [(32u8, 8u8), (24, 16)] {
        let layout = Layout::new(r, s).map_err(|e| e.to_string())?;
        for _ in 0..1000 {
            let a = Ipv6PlusAddress::new(
                rng.gen(),
                rng.gen_range(0..1u64 << r) as u32,
                rng.gen_range(0..1u32 << s) as u16,
                rng.gen_range(0..1u128 << 80),
                layout,
            )
            .map_err(|e| e.to_string())?;
            check(Ipv6PlusAddress::parse(a.pack().map_err(|e| e.to_string())?, layout) == a, format!("{a}"))?;
        }
    }
    check(Layout::new(32, 16).is_err(), "(32,16) accepted")?;
    Ok(format!("(32,8) and (24,16) x 1000; {example}"))
}

fn c13_dynpass() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let interp = InterpretationConfig::reconciled();
    let profile = ParameterProfile::paper(80, 80, &mut rng).map_err(|e| e.to_string())?;
    let (pk, sk, c) = keygen(&profile, &interp, &mut rng).map_err(|e| e.to_string())?;
    let h = Sha256Digest { bits: c.n };
    let mut seen = HashSet::new();
    let mut first = None;
    for i in 0..1000 {
        let ctx = LoginContext::new("alice", "2026-10-16", &format!("09:{:02}:{:02}", i / 60, i % 60), "ws-17");
        let pw = gen_dynamic_password(&sk, &c, &ctx, &h, &interp, &mut rng).map_err(|e| e.to_string())?;
        check(seen.insert(pw.clone()), format!("repeated password {pw}"))?;
        first.get_or_insert((ctx, pw));
    }
    let (ctx, pw) = first.unwrap();
    check(check_dynamic_password(&pk, &c, &ctx, &pw, &h, &interp).map_err(|e| e.to_string())?, "genuine rejected")?;
    let altered = LoginContext { machine: "ws-18".into(), ..ctx };
    let replay = check_dynamic_password(&pk, &c, &altered, &pw, &h, &interp).map_err(|e| e.to_string())?;
    check(!replay, "replay under altered context accepted")?;
    Ok(format!("1000 distinct {}-symbol passwords, replay rejected", pw.len()))
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        (1, "bit shadow of 01010100", Duration::from_millis(1), c1_bit_shadow),
        (2, "bit long-shadow of 01010100", Duration::from_millis(1), c2_long_shadow),
        (3, "shadow sums equal n", Duration::from_secs(5), c3_shadow_sum),
        (4, "Juna compression matches direct product", Duration::from_secs(5), c4_juna_oracle),
        (5, "hash_init m=80 n=80 passes audit", Duration::from_secs(60), c5_hash_init_paper),
        (6, "keygen audits (paper relaxed, toy strict)", Duration::from_secs(305), c6_keygen_audit),
        (7, "160-bit signature, 16-symbol escrow identity", Duration::from_secs(60), c7_sizes),
        (8, "tamper and cross-key rejection", Duration::from_secs(120), c8_tamper),
        (9, "round-trip probe report", Duration::from_secs(600), c9_probe),
        (10, "platform end to end with replay", Duration::from_secs(30), c10_platform),
        (11, "fraud guard alerts", Duration::from_secs(5), c11_fraud),
        (12, "IPv6+ pack/parse", Duration::from_secs(5), c12_ipv6),
        (13, "dynamic passwords", Duration::from_secs(120), c13_dynpass),
    ];
    let mut failures = 0;
    for (n, name, limit, f) in criteria {
        let t = Instant::now();
        let out = f();
        let elapsed = t.elapsed();
        let (ok, detail) = match out {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {limit:?} limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} criterion {n:>2}: {name} [{elapsed:.2?} / {limit:?}] {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} passed, {failures} failed", 13 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
