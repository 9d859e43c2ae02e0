use std::fs;
use std::path::Path;

use bfid_core::bits::{hex_padded, parse_hex};
use bfid_core::codec::{confect_bfid, verify_bfid, Bfid, Mode, ObjectKind, ObjectProfile};
use bfid_core::digest::{Digest, JunaDigest, Sha256Digest};
use bfid_core::juna::{hash_init as juna_init, HashConfig, HashInitValue};
use bfid_core::reesse::{
    constraint_audit, keygen as reesse_keygen, parse_key_file, roundtrip_probe, select_interpretation,
    sign as reesse_sign, verify as reesse_verify, CommonParams, InterpretationConfig, KeyFile,
    ParameterProfile, PrivateKey, PublicKey, Signature,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{
    BfidCommand, CheckArgs, ConfectArgs, HashArgs, HashInitArgs, KeygenArgs, ObjectArgs, ProbeArgs, SeedArg,
    SignArgs, VerifyArgs,
};
use crate::{failed, CliError, CliResult};

pub fn rng(seed: &SeedArg) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.seed.unwrap_or_else(|| rand::thread_rng().gen()))
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

pub fn load_key(path: &Path) -> Result<KeyFile, CliError> {
    parse_key_file(&read(path)?).map_err(failed(&path.display().to_string()))
}

pub fn private_parts(kf: &KeyFile) -> Result<(&PrivateKey, &CommonParams), CliError> {
    kf.private
        .as_ref()
        .map(|p| (p, &kf.common))
        .ok_or_else(|| CliError::Usage("a private key file is required".into()))
}

pub fn public_parts(kf: &KeyFile) -> Result<(&PublicKey, &CommonParams), CliError> {
    kf.public
        .as_ref()
        .map(|p| (p, &kf.common))
        .ok_or_else(|| CliError::Usage("key file has no public block".into()))
}

/// The public key file for a loaded key.
pub fn public_text(kf: &KeyFile) -> String {
    KeyFile { common: kf.common.clone(), public: kf.public.clone(), private: None }.to_text()
}

/// Juna over the initial value when one is given, SHA-256 otherwise.
pub fn digest_for(iv: Option<&Path>, n: usize) -> Result<Box<dyn Digest>, CliError> {
    match iv {
        None => Ok(Box::new(Sha256Digest { bits: n })),
        Some(p) => {
            let iv = HashInitValue::from_text(&read(p)?).map_err(failed(&p.display().to_string()))?;
            if iv.m() as usize != n {
                return Err(CliError::Usage(format!(
                    "initial value yields {}-bit digests, the key signs {n}-bit digests",
                    iv.m()
                )));
            }
            Ok(Box::new(JunaDigest::new(iv)))
        }
    }
}

pub fn object_profile(subject: &str, o: &ObjectArgs) -> Result<ObjectProfile, CliError> {
    let kind: ObjectKind = o.kind.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
    let mut p = ObjectProfile::new(kind, subject);
    for a in &o.attrs {
        let (k, v) = a
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("attribute {a:?} is not name=value")))?;
        p.push(k, v).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(p)
}

pub fn parse_mode(s: &str) -> Result<Mode, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("{e}")))
}

fn profile_by_name<R: Rng>(name: &str, m: u64, n: usize, rng: &mut R) -> Result<ParameterProfile, CliError> {
    match name {
        "paper" => ParameterProfile::paper(m, n, rng).map_err(|e| CliError::Usage(e.to_string())),
        other => ParameterProfile::by_name(other)
            .ok_or_else(|| CliError::Usage(format!("unknown profile {other:?} (toy24, toy32, paper)"))),
    }
}

pub fn keygen(a: KeygenArgs) -> CliResult {
    let interp: InterpretationConfig = a.interp.parse().map_err(|e| CliError::Usage(format!("--interp: {e}")))?;
    let mut rng = rng(&a.seed);
    let profile = profile_by_name(&a.profile, a.m, a.n, &mut rng)?;
    let (pk, sk, common) = reesse_keygen(&profile, &interp, &mut rng).map_err(failed("keygen"))?;
    if a.audit {
        print!("{}", constraint_audit(&pk, &sk, &common, &profile));
    }
    fs::create_dir_all(&a.out_dir).map_err(failed(&a.out_dir.display().to_string()))?;
    let kf = KeyFile { common, public: Some(pk), private: Some(sk) };
    let public = a.out_dir.join("public.key");
    let private = a.out_dir.join("private.key");
    write(&public, &public_text(&kf))?;
    write(&private, &kf.to_text())?;
    println!("{profile}");
    println!("wrote {} and {}", public.display(), private.display());
    Ok(())
}

pub fn hash_init(a: HashInitArgs) -> CliResult {
    let cfg = if a.toy {
        HashConfig::toy(a.m, a.n, a.prime_bound, a.n_tilde)
    } else {
        HashConfig::new(a.m, a.n, a.prime_bound, a.n_tilde)
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let iv = juna_init(&cfg, &mut rng(&a.seed)).map_err(failed("hash-init"))?;
    write(&a.out, &iv.to_text())?;
    let failures: Vec<_> = iv.audit().into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
    if !failures.is_empty() {
        return Err(CliError::Failed(format!("initial value fails audit: {}", failures.join("; "))));
    }
    println!("wrote {} (m={}, n={})", a.out.display(), iv.m(), iv.n());
    Ok(())
}

pub fn hash(a: HashArgs) -> CliResult {
    let data = fs::read(&a.file).map_err(failed(&a.file.display().to_string()))?;
    let h: Box<dyn Digest> = match &a.iv {
        Some(p) => {
            let iv = HashInitValue::from_text(&read(p)?).map_err(failed(&p.display().to_string()))?;
            Box::new(JunaDigest::new(iv))
        }
        None => Box::new(Sha256Digest { bits: a.bits }),
    };
    let bits = h.digest(&data).map_err(failed("hash"))?;
    println!("{}", hex_padded(&bits.to_biguint(), bits.len().div_ceil(4)));
    Ok(())
}

pub fn sign(a: SignArgs) -> CliResult {
    let kf = load_key(&a.key)?;
    let (sk, common) = private_parts(&kf)?;
    let data = fs::read(&a.file).map_err(failed(&a.file.display().to_string()))?;
    let h = digest_for(a.iv.as_deref(), common.n)?;
    let sig = reesse_sign(sk, common, &data, h.as_ref(), &common.interp, &mut rng(&a.seed)).map_err(failed("sign"))?;
    match &a.out {
        Some(p) => write(p, &sig.to_text()),
        None => {
            print!("{}", sig.to_text());
            Ok(())
        }
    }
}

fn verdict(accepted: bool, strict: bool, what: &str) -> CliResult {
    println!("{}", if accepted { "ACCEPT" } else { "REJECT" });
    if !accepted && strict {
        return Err(CliError::Negative(format!("{what} rejected")));
    }
    Ok(())
}

pub fn verify(a: VerifyArgs) -> CliResult {
    let kf = load_key(&a.key)?;
    let (pk, common) = public_parts(&kf)?;
    let data = fs::read(&a.file).map_err(failed(&a.file.display().to_string()))?;
    let sig = Signature::from_text(&read(&a.sig)?).map_err(failed(&a.sig.display().to_string()))?;
    let h = digest_for(a.iv.as_deref(), common.n)?;
    let v = reesse_verify(pk, common, &data, &sig, h.as_ref(), &common.interp).map_err(failed("verify"))?;
    if let Some(r) = &v.reason {
        eprintln!("{r}");
    }
    verdict(v.accepted, a.strict, "signature")
}

pub fn bfid(cmd: BfidCommand) -> CliResult {
    match cmd {
        BfidCommand::Confect(a) => confect(a),
        BfidCommand::Check(a) => check(a),
    }
}

fn confect(a: ConfectArgs) -> CliResult {
    let kf = load_key(&a.key)?;
    let (sk, common) = private_parts(&kf)?;
    let profile = object_profile(&a.subject, &a.object)?;
    let mode = parse_mode(&a.mode)?;
    let h = digest_for(a.iv.as_deref(), common.n)?;
    let c = confect_bfid(sk, common, &profile, h.as_ref(), mode, &common.interp, &mut rng(&a.seed))
        .map_err(failed("confect"))?;
    println!("{}", c.bfid);
    println!("digest {}", c.escrow.digest_hex());
    if mode == Mode::Escrow {
        println!("u {:x}", c.escrow.u);
    }
    println!("source {}", c.escrow.source_info);
    Ok(())
}

fn check(a: CheckArgs) -> CliResult {
    let kf = load_key(&a.key)?;
    let (pk, common) = public_parts(&kf)?;
    let profile = object_profile(&a.subject, &a.object)?;
    let bfid = Bfid::parse(&a.bfid).map_err(|e| CliError::Usage(e.to_string()))?;
    let u = match &a.u {
        Some(h) => Some(parse_hex(h).ok_or_else(|| CliError::Usage("--u is not hex".into()))?),
        None => None,
    };
    let h = digest_for(a.iv.as_deref(), common.n)?;
    let ok = verify_bfid(pk, common, &profile, &bfid, u.as_ref(), h.as_ref(), &common.interp)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    verdict(ok, a.strict, "identity")
}

pub fn probe(a: ProbeArgs) -> CliResult {
    let mut rng = rng(&a.seed);
    let profiles = a
        .profiles
        .split(',')
        .map(|n| profile_by_name(n.trim(), 80, 80, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let report = roundtrip_probe(&profiles, &InterpretationConfig::probe_variants(), a.trials, &mut rng)
        .map_err(failed("probe"))?;
    let tsv = report.to_tsv();
    match &a.out {
        Some(p) => write(p, &tsv)?,
        None => print!("{tsv}"),
    }
    match select_interpretation(&report) {
        Some((name, interp)) => eprintln!("selected {name}: {interp}"),
        None => eprintln!("no reading verified every trial"),
    }
    Ok(())
}
