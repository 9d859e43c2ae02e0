//! Line-oriented frames. Fields are separated by single spaces; a field
//! starting with `"` runs to the matching unescaped quote (`\"` and `\\`
//! escape inside).

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::PlatformError;
use crate::digest::Sha256Digest;
use crate::reesse::{sign, CommonParams, PrivateKey};

/// Distribution stage of a trace event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    WarehouseOut,
    Delivery,
    Passage,
    Marketing,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::WarehouseOut => "warehouse-out",
            Stage::Delivery => "delivery",
            Stage::Passage => "passage",
            Stage::Marketing => "marketing",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PlatformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Stage::WarehouseOut, Stage::Delivery, Stage::Passage, Stage::Marketing]
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| PlatformError::bad_request(format!("unknown stage {s:?}")))
    }
}

/// Quotes free text for a frame.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Splits a frame into fields, unquoting quoted ones.
pub fn tokenize(line: &str) -> Result<Vec<String>, PlatformError> {
    let mut out = Vec::new();
    let mut chars = line.trim_end_matches(['\r', '\n']).chars().peekable();
    loop {
        while chars.peek() == Some(&' ') {
            chars.next();
        }
        let Some(&c) = chars.peek() else { break };
        let mut tok = String::new();
        if c == '"' {
            chars.next();
            let mut closed = false;
            while let Some(c) = chars.next() {
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match chars.next() {
                        Some('n') => tok.push('\n'),
                        Some(e) => tok.push(e),
                        None => break,
                    },
                    c => tok.push(c),
                }
            }
            if !closed {
                return Err(PlatformError::bad_request("unterminated quote"));
            }
            if chars.peek().is_some_and(|&c| c != ' ') {
                return Err(PlatformError::bad_request("text after closing quote"));
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c == ' ' {
                    break;
                }
                tok.push(c);
                chars.next();
            }
        }
        out.push(tok);
    }
    Ok(out)
}

fn check_token(what: &str, s: &str) -> Result<(), PlatformError> {
    if s.is_empty() || s.contains(char::is_whitespace) || s.starts_with('"') || s.contains('=') {
        return Err(PlatformError::bad_request(format!("bad {what} {s:?}")));
    }
    Ok(())
}

/// One request frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    RegisterSubject {
        id: String,
        /// Hex of the public key file text.
        key_blob: String,
        sig: String,
    },
    RegisterId {
        bfid: String,
        subject: String,
        digest: String,
        /// Escrowed `U` in hex; `None` (`-`) for full-mode identities.
        u: Option<String>,
        source: String,
        sig: String,
    },
    Verify {
        bfid: String,
        digest: Option<String>,
        region: Option<String>,
        ts: Option<u64>,
    },
    Event {
        bfid: String,
        stage: Stage,
        region: String,
        ts: u64,
        sig: String,
    },
    Trace {
        bfid: String,
    },
    Scan {
        window: u64,
    },
}

fn parse_u64(what: &str, s: &str) -> Result<u64, PlatformError> {
    s.parse().map_err(|_| PlatformError::bad_request(format!("bad {what} {s:?}")))
}

impl Request {
    pub fn parse(line: &str) -> Result<Self, PlatformError> {
        let t = tokenize(line)?;
        let verb = t.first().map(String::as_str).unwrap_or("");
        let arity = |n: usize| {
            if t.len() == n {
                Ok(())
            } else {
                Err(PlatformError::bad_request(format!("{verb} takes {} fields, got {}", n - 1, t.len() - 1)))
            }
        };
        let req = match verb {
            "REGISTER_SUBJECT" => {
                arity(4)?;
                Request::RegisterSubject { id: t[1].clone(), key_blob: t[2].clone(), sig: t[3].clone() }
            }
            "REGISTER_ID" => {
                arity(7)?;
                Request::RegisterId {
                    bfid: t[1].clone(),
                    subject: t[2].clone(),
                    digest: t[3].clone(),
                    u: (t[4] != "-").then(|| t[4].clone()),
                    source: t[5].clone(),
                    sig: t[6].clone(),
                }
            }
            "VERIFY" => {
                if !(2..=5).contains(&t.len()) {
                    return Err(PlatformError::bad_request("VERIFY <bfid> [<digest>] [region=<r>] [ts=<t>]"));
                }
                let mut digest = None;
                let mut region = None;
                let mut ts = None;
                for f in &t[2..] {
                    if let Some(r) = f.strip_prefix("region=") {
                        check_token("region", r)?;
                        region = Some(r.to_string());
                    } else if let Some(v) = f.strip_prefix("ts=") {
                        ts = Some(parse_u64("ts", v)?);
                    } else if digest.is_none() && region.is_none() && ts.is_none() {
                        digest = Some(f.clone());
                    } else {
                        return Err(PlatformError::bad_request(format!("unexpected field {f:?}")));
                    }
                }
                Request::Verify { bfid: t[1].clone(), digest, region, ts }
            }
            "EVENT" => {
                arity(6)?;
                Request::Event {
                    bfid: t[1].clone(),
                    stage: t[2].parse()?,
                    region: t[3].clone(),
                    ts: parse_u64("ts", &t[4])?,
                    sig: t[5].clone(),
                }
            }
            "TRACE" => {
                arity(2)?;
                Request::Trace { bfid: t[1].clone() }
            }
            "SCAN" => {
                arity(2)?;
                Request::Scan { window: parse_u64("window", &t[1])? }
            }
            "" => return Err(PlatformError::bad_request("empty frame")),
            other => {
                return Err(PlatformError::new("unknown-command", format!("{other:?}")));
            }
        };
        req.validate()?;
        Ok(req)
    }

    fn validate(&self) -> Result<(), PlatformError> {
        match self {
            Request::RegisterSubject { id, key_blob, sig } => {
                check_token("subject", id)?;
                check_token("key blob", key_blob)?;
                check_token("signature", sig)
            }
            Request::RegisterId { bfid, subject, digest, u, sig, .. } => {
                check_token("bfid", bfid)?;
                check_token("subject", subject)?;
                check_token("digest", digest)?;
                if let Some(u) = u {
                    check_token("U", u)?;
                }
                check_token("signature", sig)
            }
            Request::Verify { bfid, digest, .. } => {
                check_token("bfid", bfid)?;
                digest.as_deref().map_or(Ok(()), |d| check_token("digest", d))
            }
            Request::Event { bfid, region, sig, .. } => {
                check_token("bfid", bfid)?;
                check_token("region", region)?;
                check_token("signature", sig)
            }
            Request::Trace { bfid } => check_token("bfid", bfid),
            Request::Scan { .. } => Ok(()),
        }
    }

    /// The frame without its trailing signature field: the signed text.
    pub fn body(&self) -> String {
        match self {
            Request::RegisterSubject { id, key_blob, .. } => format!("REGISTER_SUBJECT {id} {key_blob}"),
            Request::RegisterId { bfid, subject, digest, u, source, .. } => format!(
                "REGISTER_ID {bfid} {subject} {digest} {} {}",
                u.as_deref().unwrap_or("-"),
                quote(source)
            ),
            Request::Event { bfid, stage, region, ts, .. } => format!("EVENT {bfid} {stage} {region} {ts}"),
            other => other.to_frame(),
        }
    }

    pub fn signature(&self) -> Option<&str> {
        match self {
            Request::RegisterSubject { sig, .. }
            | Request::RegisterId { sig, .. }
            | Request::Event { sig, .. } => Some(sig),
            _ => None,
        }
    }

    pub fn to_frame(&self) -> String {
        match self {
            Request::RegisterSubject { sig, .. } | Request::RegisterId { sig, .. } | Request::Event { sig, .. } => {
                format!("{} {sig}", self.body())
            }
            Request::Verify { bfid, digest, region, ts } => {
                let mut s = format!("VERIFY {bfid}");
                if let Some(d) = digest {
                    s += &format!(" {d}");
                }
                if let Some(r) = region {
                    s += &format!(" region={r}");
                }
                if let Some(t) = ts {
                    s += &format!(" ts={t}");
                }
                s
            }
            Request::Trace { bfid } => format!("TRACE {bfid}"),
            Request::Scan { window } => format!("SCAN {window}"),
        }
    }

    /// Whether the frame changes platform state and goes to the log.
    pub fn is_mutation(&self) -> bool {
        !matches!(self, Request::Trace { .. } | Request::Scan { .. })
    }
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_frame())
    }
}

/// Digest used for request signatures: SHA-256 expanded to `n` bits.
pub fn request_digest(common: &CommonParams) -> Sha256Digest {
    Sha256Digest { bits: common.n }
}

/// Signs a frame body with the subject's key; the hex token that ends the
/// frame.
pub fn sign_body<R: Rng + ?Sized>(
    body: &str,
    private: &PrivateKey,
    common: &CommonParams,
    rng: &mut R,
) -> Result<String, PlatformError> {
    let sig = sign(private, common, body.as_bytes(), &request_digest(common), &common.interp, rng)
        .map_err(|e| PlatformError::new("signing", e.to_string()))?;
    Ok(sig.to_hex(common.m()))
}

/// Builders for the signed frames.
pub mod frames {
    use super::*;
    use crate::bits::BitString;
    use crate::codec::{Bfid, Confection};

    pub fn register_subject<R: Rng + ?Sized>(
        id: &str,
        public_key_text: &str,
        private: &PrivateKey,
        common: &CommonParams,
        rng: &mut R,
    ) -> Result<Request, PlatformError> {
        let key_blob = hex_encode(public_key_text.as_bytes());
        let mut req = Request::RegisterSubject { id: id.into(), key_blob, sig: String::new() };
        let sig = sign_body(&req.body(), private, common, rng)?;
        if let Request::RegisterSubject { sig: s, .. } = &mut req {
            *s = sig;
        }
        Ok(req)
    }

    pub fn register_id<R: Rng + ?Sized>(
        conf: &Confection,
        subject: &str,
        private: &PrivateKey,
        common: &CommonParams,
        rng: &mut R,
    ) -> Result<Request, PlatformError> {
        let escrow = matches!(conf.mode, crate::codec::Mode::Escrow);
        register_id_parts(
            &conf.bfid,
            subject,
            &conf.escrow.digest,
            escrow.then(|| format!("{:x}", conf.escrow.u)),
            &conf.escrow.source_info,
            private,
            common,
            rng,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn register_id_parts<R: Rng + ?Sized>(
        bfid: &Bfid,
        subject: &str,
        digest: &BitString,
        u: Option<String>,
        source: &str,
        private: &PrivateKey,
        common: &CommonParams,
        rng: &mut R,
    ) -> Result<Request, PlatformError> {
        let digest = crate::bits::hex_padded(&digest.to_biguint(), digest.len().div_ceil(4));
        let mut req = Request::RegisterId {
            bfid: bfid.text().into(),
            subject: subject.into(),
            digest,
            u,
            source: source.into(),
            sig: String::new(),
        };
        let sig = sign_body(&req.body(), private, common, rng)?;
        if let Request::RegisterId { sig: s, .. } = &mut req {
            *s = sig;
        }
        Ok(req)
    }

    pub fn event<R: Rng + ?Sized>(
        bfid: &str,
        stage: Stage,
        region: &str,
        ts: u64,
        private: &PrivateKey,
        common: &CommonParams,
        rng: &mut R,
    ) -> Result<Request, PlatformError> {
        let mut req = Request::Event { bfid: bfid.into(), stage, region: region.into(), ts, sig: String::new() };
        let sig = sign_body(&req.body(), private, common, rng)?;
        if let Request::Event { sig: s, .. } = &mut req {
            *s = sig;
        }
        Ok(req)
    }
}

pub(crate) fn hex_encode(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn hex_decode(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) || !s.is_ascii() {
        return None;
    }
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).ok())
        .collect()
}
