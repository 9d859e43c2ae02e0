use rand::Rng;

use crate::codec::{confect_bfid, verify_bfid, Bfid, CodecError, Mode, ObjectKind, ObjectProfile};
use crate::digest::Digest;
use crate::reesse::{CommonParams, InterpretationConfig, PrivateKey, PublicKey};

/// What a login binds: who, when and where.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LoginContext {
    pub user: String,
    pub date: String,
    pub time: String,
    pub machine: String,
}

impl LoginContext {
    pub fn new(user: &str, date: &str, time: &str, machine: &str) -> Self {
        LoginContext { user: user.into(), date: date.into(), time: time.into(), machine: machine.into() }
    }

    pub fn profile(&self) -> ObjectProfile {
        ObjectProfile::new(ObjectKind::Login, self.user.clone())
            .with("date", self.date.clone())
            .and_then(|p| p.with("time", self.time.clone()))
            .and_then(|p| p.with("machine", self.machine.clone()))
            .expect("attribute names are distinct")
    }
}

/// A full-mode identity over the login context, so the server needs only
/// the user's public key to check it.
pub fn gen_dynamic_password<R: Rng + ?Sized>(
    private: &PrivateKey,
    common: &CommonParams,
    ctx: &LoginContext,
    hash: &dyn Digest,
    interp: &InterpretationConfig,
    rng: &mut R,
) -> Result<String, CodecError> {
    let c = confect_bfid(private, common, &ctx.profile(), hash, Mode::Full, interp, rng)?;
    Ok(c.bfid.text().to_string())
}

/// `Ok(false)` for a well-formed password that does not match; `Err` when
/// the text is not a full-mode identity for this key.
pub fn check_dynamic_password(
    public: &PublicKey,
    common: &CommonParams,
    ctx: &LoginContext,
    password: &str,
    hash: &dyn Digest,
    interp: &InterpretationConfig,
) -> Result<bool, CodecError> {
    let bfid = Bfid::parse(password)?;
    if bfid.len() != Bfid::full_len(common.m()) {
        return Err(CodecError::Malformed(format!(
            "password has {} symbols, expected {}",
            bfid.len(),
            Bfid::full_len(common.m())
        )));
    }
    verify_bfid(public, common, &ctx.profile(), &bfid, None, hash, interp)
}
