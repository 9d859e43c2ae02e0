use std::collections::HashSet;

use bfid_core::digest::Sha256Digest;
use bfid_core::netapps::{
    check_dynamic_password, gen_dynamic_password, host_interface_profile, make_interface_id,
    validate_source_address, Ipv6PlusAddress, Layout, LoginContext,
};
use bfid_core::platform::{frames, Platform, PlatformConfig, VerificationService, VerifyOutcome};
use bfid_core::reesse::{keygen, InterpretationConfig, KeyFile, ParameterProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_addresses_roundtrip_on_extreme_layouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for layout in [Layout::new(32, 8).unwrap(), Layout::new(24, 16).unwrap()] {
        for _ in 0..1000 {
            let a = Ipv6PlusAddress::new(
                rng.gen(),
                rng.gen_range(0..1u64 << layout.routing_bits()) as u32,
                rng.gen_range(0..1u32 << layout.subnet_bits()) as u16,
                rng.gen_range(0..1u128 << 80),
                layout,
            )
            .unwrap();
            assert_eq!(Ipv6PlusAddress::parse(a.pack().unwrap(), layout), a);
            assert_eq!(Ipv6PlusAddress::from_ipv6(a.to_ipv6().unwrap(), layout), a);
        }
    }
}

#[test]
fn source_address_validation_end_to_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let interp = InterpretationConfig::reconciled();
    let profile = ParameterProfile::paper(80, 80, &mut rng).unwrap();
    let (pk, sk, common) = keygen(&profile, &interp, &mut rng).unwrap();
    let hash = Sha256Digest { bits: common.n };
    let public_text = KeyFile { common: common.clone(), public: Some(pk), private: None }.to_text();

    let p = Platform::in_memory(PlatformConfig::default());
    let req = frames::register_subject("cn-admin", &public_text, &sk, &common, &mut rng).unwrap();
    assert!(p.handle_line(&req.to_frame()).starts_with("OK"));

    let layout = Layout::new(32, 8).unwrap();
    let host = host_interface_profile("cn-admin", "host.example.cn", "02-00-5e-ff-fe-00-53-01", 86, 0x0a0b0c0d, 7)
        .unwrap();
    let (iid, conf) = make_interface_id(&sk, &common, &host, &hash, &interp, &mut rng).unwrap();
    assert_eq!(conf.bfid.len(), 16);
    let req = frames::register_id(&conf, "cn-admin", &sk, &common, &mut rng).unwrap();
    assert!(p.handle_line(&req.to_frame()).starts_with("OK"));

    let addr = Ipv6PlusAddress::new(86, 0x0a0b0c0d, 7, iid, layout).unwrap();
    let mut svc: &Platform = &p;
    let verdict = validate_source_address(&addr, &mut svc, None).unwrap();
    assert!(matches!(verdict, VerifyOutcome::Accept { ref source_info } if source_info.contains("host.example.cn")));
    assert_eq!(svc.verify(addr.interface_bfid().text(), None, None, None).unwrap(), verdict);

    let random = Ipv6PlusAddress { interface_id: rng.gen_range(0..1u128 << 80), ..addr };
    assert_eq!(validate_source_address(&random, &mut svc, None).unwrap(), VerifyOutcome::Unknown);

    // A flipped interface bit names an identity nobody registered.
    for bit in [0, 17, 79] {
        let flipped = Ipv6PlusAddress { interface_id: iid ^ (1 << bit), ..addr };
        let v = validate_source_address(&flipped, &mut svc, None).unwrap();
        assert_eq!(v, VerifyOutcome::Unknown);
        assert_eq!(svc.verify(flipped.interface_bfid().text(), None, None, None).unwrap(), v);
    }

    // Interface ids need an 80-bit key.
    let mut toy_rng = ChaCha8Rng::seed_from_u64(52);
    let (_, tsk, tc) = keygen(&ParameterProfile::toy32(), &interp, &mut toy_rng).unwrap();
    assert!(make_interface_id(&tsk, &tc, &host, &Sha256Digest { bits: tc.n }, &interp, &mut toy_rng).is_err());
}

#[test]
fn dynamic_passwords_at_80_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let interp = InterpretationConfig::reconciled();
    let profile = ParameterProfile::paper(80, 80, &mut rng).unwrap();
    let (pk, sk, common) = keygen(&profile, &interp, &mut rng).unwrap();
    let hash = Sha256Digest { bits: common.n };
    let ctx = LoginContext::new("alice", "2026-10-16", "09:00:00", "ws-17");
    let mut seen = HashSet::new();
    for _ in 0..100 {
        let pw = gen_dynamic_password(&sk, &common, &ctx, &hash, &interp, &mut rng).unwrap();
        assert_eq!(pw.len(), 32);
        assert!(check_dynamic_password(&pk, &common, &ctx, &pw, &hash, &interp).unwrap());
        assert!(seen.insert(pw));
    }
}
