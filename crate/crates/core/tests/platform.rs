use std::sync::Arc;
use std::thread;

use bfid_core::codec::{confect_bfid, Confection, Mode, ObjectKind, ObjectProfile};
use bfid_core::digest::Sha256Digest;
use bfid_core::platform::server::spawn;
use bfid_core::platform::{
    frames, AlertReason, ClientError, Platform, PlatformClient, PlatformConfig, Request, Stage,
    VerificationService, VerifyOutcome,
};
use bfid_core::reesse::{keygen, CommonParams, InterpretationConfig, KeyFile, ParameterProfile, PrivateKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Subject {
    id: &'static str,
    public_text: String,
    private: PrivateKey,
    common: CommonParams,
}

fn subject(id: &'static str, seed: u64) -> Subject {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pk, sk, common) =
        keygen(&ParameterProfile::toy32(), &InterpretationConfig::reconciled(), &mut rng).unwrap();
    let public_text = KeyFile { common: common.clone(), public: Some(pk), private: None }.to_text();
    Subject { id, public_text, private: sk, common }
}

fn item(serial: u32) -> ObjectProfile {
    ObjectProfile::new(ObjectKind::Merchandise, "acme")
        .with("serial", serial.to_string())
        .unwrap()
        .with("name", "green tea")
        .unwrap()
}

fn confect(s: &Subject, serial: u32, mode: Mode, rng: &mut ChaCha8Rng) -> Confection {
    confect_bfid(
        &s.private,
        &s.common,
        &item(serial),
        &Sha256Digest { bits: s.common.n },
        mode,
        &s.common.interp,
        rng,
    )
    .unwrap()
}

fn register(p: &Platform, s: &Subject, rng: &mut ChaCha8Rng) {
    let req = frames::register_subject(s.id, &s.public_text, &s.private, &s.common, rng).unwrap();
    assert_eq!(p.handle_line(&req.to_frame()), format!("OK REGISTERED {}", s.id));
}

fn register_id(p: &Platform, s: &Subject, c: &Confection, rng: &mut ChaCha8Rng) -> String {
    let req = frames::register_id(c, s.id, &s.private, &s.common, rng).unwrap();
    p.handle_line(&req.to_frame())
}

#[test]
fn register_and_verify_both_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = Platform::in_memory(PlatformConfig::default());
    let s = subject("acme", 2);
    register(&p, &s, &mut rng);
    for (serial, mode) in [(1, Mode::Escrow), (2, Mode::Full)] {
        let c = confect(&s, serial, mode, &mut rng);
        assert_eq!(register_id(&p, &s, &c, &mut rng), format!("OK REGISTERED {}", c.bfid));
        let resp = p.handle_line(&format!("VERIFY {}", c.bfid));
        assert_eq!(resp, format!("OK ACCEPT \"{}\"", c.escrow.source_info.replace('"', "\\\"")));
        let lower = c.bfid.text().to_ascii_lowercase();
        assert!(p.handle_line(&format!("VERIFY {lower} {}", c.escrow.digest_hex())).starts_with("OK ACCEPT"));
        let other = confect(&s, serial + 100, mode, &mut rng);
        assert_eq!(p.handle_line(&format!("VERIFY {} {}", c.bfid, other.escrow.digest_hex())), "OK REJECT");
    }
}

#[test]
fn unknown_malformed_and_altered_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = Platform::in_memory(PlatformConfig::default());
    let s = subject("acme", 4);
    register(&p, &s, &mut rng);
    let c = confect(&s, 7, Mode::Escrow, &mut rng);
    register_id(&p, &s, &c, &mut rng);
    let mut text: Vec<u8> = c.bfid.text().bytes().collect();
    text[3] = if text[3] == b'A' { b'B' } else { b'A' };
    let altered = String::from_utf8(text).unwrap();
    assert_eq!(p.handle_line(&format!("VERIFY {altered}")), "OK UNKNOWN");
    assert!(p.handle_line("VERIFY 0123IOU").starts_with("ERR malformed-bfid"));
    assert!(p.handle_line("TRACE 00000000").starts_with("ERR unknown-bfid"));
    assert!(p.handle_line("FROB").starts_with("ERR unknown-command"));
}

#[test]
fn registration_refusals() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = Platform::in_memory(PlatformConfig::default());
    let s = subject("acme", 6);
    let mallory = subject("mallory", 7);

    // Signed by someone else's key.
    let req = frames::register_subject("acme", &s.public_text, &mallory.private, &mallory.common, &mut rng).unwrap();
    assert!(p.handle_line(&req.to_frame()).starts_with("ERR bad-signature"));

    // Private material in the blob.
    let mut rng2 = ChaCha8Rng::seed_from_u64(6);
    let (pk, sk, common) =
        keygen(&ParameterProfile::toy32(), &InterpretationConfig::reconciled(), &mut rng2).unwrap();
    let full = KeyFile { common: common.clone(), public: Some(pk), private: Some(sk.clone()) }.to_text();
    let req = frames::register_subject("acme", &full, &sk, &common, &mut rng).unwrap();
    assert!(p.handle_line(&req.to_frame()).starts_with("ERR malformed-key"));

    register(&p, &s, &mut rng);
    let req = frames::register_subject("acme", &s.public_text, &s.private, &s.common, &mut rng).unwrap();
    assert!(p.handle_line(&req.to_frame()).starts_with("ERR duplicate-subject"));

    // An identity confected by another key does not verify under acme's key.
    let c = confect(&mallory, 1, Mode::Escrow, &mut rng);
    assert!(register_id(&p, &s, &c, &mut rng).starts_with("ERR bad-identity"));

    let c = confect(&s, 1, Mode::Escrow, &mut rng);
    assert!(register_id(&p, &mallory, &c, &mut rng).starts_with("ERR unknown-subject"));
    assert!(register_id(&p, &s, &c, &mut rng).starts_with("OK"));
    assert!(register_id(&p, &s, &c, &mut rng).starts_with("ERR duplicate-bfid"));

    // Tampered frame: the signature covers the source text.
    let c2 = confect(&s, 2, Mode::Escrow, &mut rng);
    let req = frames::register_id(&c2, s.id, &s.private, &s.common, &mut rng).unwrap();
    let tampered = req.to_frame().replace("green tea", "black tea");
    assert!(p.handle_line(&tampered).starts_with("ERR bad-signature"));
}

#[test]
fn trace_events_in_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = Platform::in_memory(PlatformConfig::default());
    let s = subject("acme", 9);
    register(&p, &s, &mut rng);
    let c = confect(&s, 1, Mode::Escrow, &mut rng);
    register_id(&p, &s, &c, &mut rng);
    let b = c.bfid.text();
    for (stage, region, ts) in [(Stage::WarehouseOut, "east", 10), (Stage::Delivery, "east", 20), (Stage::Marketing, "west", 20)] {
        let req = frames::event(b, stage, region, ts, &s.private, &s.common, &mut rng).unwrap();
        assert!(p.handle_line(&req.to_frame()).starts_with("OK EVENT"));
    }
    let late = frames::event(b, Stage::Passage, "west", 5, &s.private, &s.common, &mut rng).unwrap();
    assert!(p.handle_line(&late.to_frame()).starts_with("ERR out-of-order"));
    let trace = p.handle_line(&format!("TRACE {b}"));
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines[0], "OK 3");
    assert!(lines[1].ends_with(&format!("{b} warehouse-out east 10")));
    assert!(lines[3].ends_with(&format!("{b} marketing west 20")));
}

#[test]
fn fraud_scenarios() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let p = Platform::in_memory(PlatformConfig::default());
    let s = subject("acme", 11);
    register(&p, &s, &mut rng);
    let c = confect(&s, 1, Mode::Escrow, &mut rng);
    register_id(&p, &s, &c, &mut rng);
    let b = c.bfid.text();
    assert!(p.handle_line(&format!("VERIFY {b} region=east ts=100")).starts_with("OK ACCEPT"));
    assert!(p.handle_line(&format!("VERIFY {b} region=west ts=200")).starts_with("OK ACCEPT"));
    let wrong = confect(&s, 2, Mode::Escrow, &mut rng).escrow.digest_hex();
    for i in 0..10 {
        assert_eq!(p.handle_line(&format!("VERIFY {b} {wrong} ts={}", 300 + i)), "OK REJECT");
    }
    for i in 0..6 {
        assert_eq!(p.handle_line(&format!("VERIFY 0000000000000000 ts={}", 400 + i)), "OK UNKNOWN");
    }
    let alerts = p.scan(86_400);
    let reasons: Vec<_> = alerts.iter().map(|a| (a.bfid.as_str(), a.reason)).collect();
    assert_eq!(
        reasons,
        vec![
            ("0000000000000000", AlertReason::UnknownIdBurst),
            (b, AlertReason::RepeatVerifyOverlap),
            (b, AlertReason::VerifyFailureBurst),
        ]
    );
    let obs = p.observations();
    for a in &alerts {
        for seq in &a.evidence {
            assert!(obs.iter().any(|o| o.seq == *seq && o.bfid == a.bfid));
        }
    }
    let resp = p.handle_line("SCAN 86400");
    assert!(resp.starts_with("OK 3\nALERT 0000000000000000 unknown-id-burst"));
    assert_eq!(p.scan(50).len(), 2);
}

#[test]
fn log_replay_reproduces_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("platform.log");
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = subject("acme", 13);
    let snapshot = {
        let p = Platform::open(&path, PlatformConfig::default()).unwrap();
        register(&p, &s, &mut rng);
        for i in 0..3 {
            let c = confect(&s, i, if i % 2 == 0 { Mode::Escrow } else { Mode::Full }, &mut rng);
            register_id(&p, &s, &c, &mut rng);
            let ev = frames::event(c.bfid.text(), Stage::Delivery, "north", 5 + i as u64, &s.private, &s.common, &mut rng)
                .unwrap();
            p.handle_line(&ev.to_frame());
            p.handle_line(&format!("VERIFY {} region=north", c.bfid));
        }
        p.handle_line("VERIFY ZZZZZZZZZZZZZZZZ");
        p.snapshot()
    };
    let reopened = Platform::open(&path, PlatformConfig::default()).unwrap();
    assert_eq!(reopened.snapshot(), snapshot);

    // An interrupted append leaves a partial line that is dropped on open.
    use std::io::Write;
    let mut f = std::fs::OpenOptions::new().append(true).open(&path).unwrap();
    f.write_all(b"OBSERVE ZZZZ UNKN").unwrap();
    drop(f);
    let again = Platform::open(&path, PlatformConfig::default()).unwrap();
    assert_eq!(again.snapshot(), snapshot);
    again.handle_line("VERIFY ZZZZZZZZZZZZZZZZ");
    drop(again);
    let last = Platform::open(&path, PlatformConfig::default()).unwrap();
    assert_eq!(last.seq(), reopened.seq() + 1);
}

#[test]
fn corrupt_log_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("platform.log");
    std::fs::write(&path, "OBSERVE A MAYBE - 1\n").unwrap();
    let err = Platform::open(&path, PlatformConfig::default()).err().unwrap();
    assert_eq!(err.code, "bad-log");
}

#[test]
fn tcp_round_trip_and_concurrency() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let p = Arc::new(Platform::in_memory(PlatformConfig::default()));
    let s = subject("acme", 15);
    register(&p, &s, &mut rng);
    let c = confect(&s, 1, Mode::Escrow, &mut rng);
    register_id(&p, &s, &c, &mut rng);
    let server = spawn("127.0.0.1:0", Arc::clone(&p)).unwrap();
    let addr = server.local_addr();

    let workers: Vec<_> = (0..8)
        .map(|i| {
            let bfid = c.bfid.text().to_string();
            thread::spawn(move || {
                let mut cl = PlatformClient::connect(addr, Some(std::time::Duration::from_secs(10))).unwrap();
                for j in 0..10 {
                    let out = cl.verify(&bfid, None, Some("east"), Some(i * 100 + j)).unwrap();
                    assert!(matches!(out, VerifyOutcome::Accept { .. }));
                }
                assert_eq!(cl.verify("0000000000000000", None, None, None).unwrap(), VerifyOutcome::Unknown);
            })
        })
        .collect();
    for w in workers {
        w.join().unwrap();
    }
    assert_eq!(p.observations().len(), 88);

    let mut cl = PlatformClient::connect(addr, None).unwrap();
    let (fields, rest) = cl.send(&Request::Scan { window: 86_400 }).unwrap();
    assert_eq!(fields, vec![rest.len().to_string()]);
    match cl.send(&Request::Trace { bfid: "0000".into() }) {
        Err(ClientError::Refused(e)) => assert_eq!(e.code, "unknown-bfid"),
        other => panic!("{other:?}"),
    }
    let mut local: &Platform = &p;
    assert!(matches!(local.verify(c.bfid.text(), None, None, None).unwrap(), VerifyOutcome::Accept { .. }));
    server.shutdown().unwrap();
}

#[test]
fn transport_failure_is_distinct() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let err: ClientError = PlatformClient::connect(addr, Some(std::time::Duration::from_secs(2)))
        .err()
        .unwrap()
        .into();
    assert!(matches!(err, ClientError::Transport(_)));
}
