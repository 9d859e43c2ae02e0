//! Identity strings over a 32-symbol alphabet, object profiles, and BFID
//! confection and verification.
//!
//! A BFID carries the signature of an object profile's digest. In escrow
//! mode only `Q` is encoded (16 symbols at `m = 80`) and `U` is held by the
//! platform; in full mode `Q ‖ U` is encoded (32 symbols at `m = 80`).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::Rng;
use thiserror::Error;

use crate::bits::{hex_padded, BitString};
use crate::digest::Digest;
use crate::reesse::{
    sign_digest, verify_digest, CommonParams, InterpretationConfig, PrivateKey, PublicKey,
    ReesseError, Signature,
};

/// Digits, then capitals without I, L, O, U.
pub const ALPHABET: &[u8; 32] = b"0123456789ABCDEFGHJKMNPQRSTVWXYZ";

/// Conforming identity lengths in symbols.
pub const CONFORMING: std::ops::RangeInclusive<usize> = 16..=22;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("bit length {0} is not a multiple of 5")]
    BadLength(usize),
    #[error("symbol {ch:?} at position {pos} is not in the alphabet")]
    ForeignSymbol { pos: usize, ch: char },
    #[error("empty identity")]
    Empty,
    #[error("escrow-mode BFID needs the escrowed U")]
    MissingEscrow,
    #[error("malformed BFID: {0}")]
    Malformed(String),
    #[error("invalid object profile: {0}")]
    Profile(String),
    #[error(transparent)]
    Signature(#[from] ReesseError),
}

fn symbol_value(c: char) -> Option<u8> {
    let up = c.to_ascii_uppercase() as u8;
    ALPHABET.iter().position(|&a| a == up).map(|p| p as u8)
}

/// Maps big-endian 5-bit groups to symbols.
pub fn encode_bits(bits: &BitString) -> Result<String, CodecError> {
    if !bits.len().is_multiple_of(5) {
        return Err(CodecError::BadLength(bits.len()));
    }
    Ok(bits
        .as_slice()
        .chunks(5)
        .map(|g| {
            let v = g.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
            ALPHABET[v] as char
        })
        .collect())
}

/// Inverse of [`encode_bits`]; lowercase symbols are accepted.
pub fn decode_text(text: &str) -> Result<BitString, CodecError> {
    let mut out = Vec::with_capacity(text.len() * 5);
    for (pos, ch) in text.chars().enumerate() {
        let v = symbol_value(ch).ok_or(CodecError::ForeignSymbol { pos, ch })?;
        out.extend((0..5).rev().map(|i| v >> i & 1 == 1));
    }
    Ok(BitString::new(out))
}

/// Left-pads with zero bits to a multiple of 5.
fn pad5(bits: &BitString) -> BitString {
    let pad = (5 - bits.len() % 5) % 5;
    BitString::zeros(pad).concat(bits)
}

/// An identity string and its bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bfid {
    text: String,
    bits: BitString,
}

impl Bfid {
    pub fn from_bits(bits: BitString) -> Result<Self, CodecError> {
        let text = encode_bits(&bits)?;
        Ok(Bfid { text, bits })
    }

    pub fn parse(text: &str) -> Result<Self, CodecError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(CodecError::Empty);
        }
        let bits = decode_text(text)?;
        Ok(Bfid { text: text.to_ascii_uppercase(), bits })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    /// Length in symbols.
    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// 16 to 22 symbols.
    pub fn is_conforming(&self) -> bool {
        CONFORMING.contains(&self.len())
    }

    /// Symbols of an escrow-mode BFID for an `m`-bit modulus.
    pub fn escrow_len(m: u64) -> usize {
        m.div_ceil(5) as usize
    }

    /// Symbols of a full-mode BFID for an `m`-bit modulus.
    pub fn full_len(m: u64) -> usize {
        (2 * m).div_ceil(5) as usize
    }

    /// The value of the low `width` bits, requiring the padding above them
    /// to be zero.
    fn value(&self, width: usize) -> Result<BigUint, CodecError> {
        let s = self.bits.as_slice();
        if s.len() < width {
            return Err(CodecError::Malformed(format!("{} bits, need {width}", s.len())));
        }
        let (pad, body) = s.split_at(s.len() - width);
        if pad.iter().any(|&b| b) {
            return Err(CodecError::Malformed("nonzero padding".into()));
        }
        Ok(BitString::new(body.to_vec()).to_biguint())
    }
}

impl fmt::Display for Bfid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for Bfid {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Bfid::parse(s)
    }
}

/// What an object profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    Merchandise,
    Document,
    Program,
    Resident,
    HostInterface,
    Login,
    Passport,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 7] = [
        ObjectKind::Merchandise,
        ObjectKind::Document,
        ObjectKind::Program,
        ObjectKind::Resident,
        ObjectKind::HostInterface,
        ObjectKind::Login,
        ObjectKind::Passport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Merchandise => "merchandise",
            ObjectKind::Document => "document",
            ObjectKind::Program => "program",
            ObjectKind::Resident => "resident",
            ObjectKind::HostInterface => "host-interface",
            ObjectKind::Login => "login",
            ObjectKind::Passport => "passport",
        }
    }
}

impl fmt::Display for ObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectKind {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| CodecError::Profile(format!("unknown kind {s:?}")))
    }
}

/// The characteristic information of an object, bound into its BFID.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectProfile {
    pub kind: ObjectKind,
    pub subject_id: String,
    attributes: Vec<(String, String)>,
}

impl ObjectProfile {
    pub fn new(kind: ObjectKind, subject_id: impl Into<String>) -> Self {
        ObjectProfile { kind, subject_id: subject_id.into(), attributes: Vec::new() }
    }

    /// Appends an attribute; names must be unique.
    pub fn with(mut self, name: impl Into<String>, value: impl Into<String>) -> Result<Self, CodecError> {
        self.push(name, value)?;
        Ok(self)
    }

    pub fn push(&mut self, name: impl Into<String>, value: impl Into<String>) -> Result<(), CodecError> {
        let name = name.into();
        if self.attributes.iter().any(|(n, _)| *n == name) {
            return Err(CodecError::Profile(format!("duplicate attribute {name:?}")));
        }
        self.attributes.push((name, value.into()));
        Ok(())
    }

    pub fn attributes(&self) -> &[(String, String)] {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    /// Length-prefixed (u32, big-endian) kind, subject, attribute count,
    /// then each name and value in order.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        fn field(out: &mut Vec<u8>, s: &str) {
            out.extend_from_slice(&(s.len() as u32).to_be_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        let mut out = Vec::new();
        field(&mut out, self.kind.as_str());
        field(&mut out, &self.subject_id);
        out.extend_from_slice(&(self.attributes.len() as u32).to_be_bytes());
        for (n, v) in &self.attributes {
            field(&mut out, n);
            field(&mut out, v);
        }
        out
    }

    /// One-line human summary returned to inquirers.
    pub fn source_info(&self) -> String {
        let attrs: Vec<String> = self.attributes.iter().map(|(n, v)| format!("{n}={v}")).collect();
        if attrs.is_empty() {
            format!("{} from {}", self.kind, self.subject_id)
        } else {
            format!("{} from {}: {}", self.kind, self.subject_id, attrs.join(", "))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `Q ‖ U` in the identity.
    Full,
    /// `Q` in the identity, `U` held by the platform.
    Escrow,
}

impl FromStr for Mode {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "escrow" => Ok(Mode::Escrow),
            _ => Err(CodecError::Malformed(format!("unknown mode {s:?}"))),
        }
    }
}

/// What the platform stores for an escrow-mode BFID.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscrowPayload {
    pub digest: BitString,
    pub u: BigUint,
    pub source_info: String,
}

impl EscrowPayload {
    /// Digest as `ceil(n/4)` hex digits.
    pub fn digest_hex(&self) -> String {
        hex_padded(&self.digest.to_biguint(), self.digest.len().div_ceil(4))
    }
}

#[derive(Debug, Clone)]
pub struct Confection {
    pub bfid: Bfid,
    pub mode: Mode,
    /// Always present; in full mode it is informational.
    pub escrow: EscrowPayload,
}

impl Confection {
    pub fn is_conforming(&self) -> bool {
        self.bfid.is_conforming()
    }
}

/// Bits of a digest given as hex, truncated to the low `n` bits.
pub fn digest_from_hex(hex: &str, n: usize) -> Option<BitString> {
    let v = crate::bits::parse_hex(hex)?;
    BitString::from_biguint(&v, n).ok()
}

/// Signs the profile digest and encodes the signature.
pub fn confect_bfid<R: Rng + ?Sized>(
    private: &PrivateKey,
    common: &CommonParams,
    profile: &ObjectProfile,
    hash: &dyn Digest,
    mode: Mode,
    interp: &InterpretationConfig,
    rng: &mut R,
) -> Result<Confection, CodecError> {
    if hash.output_bits() != common.n {
        return Err(ReesseError::DigestLength { expected: common.n, got: hash.output_bits() }.into());
    }
    let digest = hash.digest(&profile.canonical_bytes()).map_err(ReesseError::from)?;
    let tr = sign_digest(private, common, &digest, interp, rng)?;
    let m = common.m();
    let sig = tr.signature();
    let bits = match mode {
        Mode::Escrow => BitString::from_biguint(&sig.q, m as usize),
        Mode::Full => BitString::from_biguint(&sig.q, m as usize)
            .and_then(|q| Ok(q.concat(&BitString::from_biguint(&sig.u, m as usize)?))),
    }
    .expect("signature values are below M");
    Ok(Confection {
        bfid: Bfid::from_bits(pad5(&bits))?,
        mode,
        escrow: EscrowPayload { digest, u: sig.u, source_info: profile.source_info() },
    })
}

/// Recovers `(Q, U)` from a BFID, taking `U` from the escrow in escrow mode.
pub fn signature_from_bfid(
    bfid: &Bfid,
    m: u64,
    escrowed_u: Option<&BigUint>,
) -> Result<Signature, CodecError> {
    let len = bfid.len();
    if len == Bfid::escrow_len(m) {
        let u = escrowed_u.ok_or(CodecError::MissingEscrow)?;
        Ok(Signature { q: bfid.value(m as usize)?, u: u.clone() })
    } else if len == Bfid::full_len(m) {
        let v = bfid.value(2 * m as usize)?;
        let mask = (BigUint::from(1u32) << m) - 1u32;
        Ok(Signature { q: &v >> m, u: v & mask })
    } else {
        Err(CodecError::Malformed(format!(
            "{len} symbols; expected {} (escrow) or {} (full)",
            Bfid::escrow_len(m),
            Bfid::full_len(m)
        )))
    }
}

/// Verifies a BFID against the profile it claims to identify.
pub fn verify_bfid(
    public: &PublicKey,
    common: &CommonParams,
    profile: &ObjectProfile,
    bfid: &Bfid,
    escrowed_u: Option<&BigUint>,
    hash: &dyn Digest,
    interp: &InterpretationConfig,
) -> Result<bool, CodecError> {
    let sig = signature_from_bfid(bfid, common.m(), escrowed_u)?;
    if hash.output_bits() != common.n {
        return Err(ReesseError::DigestLength { expected: common.n, got: hash.output_bits() }.into());
    }
    let digest = hash.digest(&profile.canonical_bytes()).map_err(ReesseError::from)?;
    Ok(verify_digest(public, common, &digest, &sig, interp)?.accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eighty_zero_bits() {
        let t = encode_bits(&BitString::zeros(80)).unwrap();
        assert_eq!(t, "0".repeat(16));
        assert!(matches!(encode_bits(&BitString::zeros(81)), Err(CodecError::BadLength(81))));
    }

    #[test]
    fn foreign_symbol_position() {
        match decode_text("01IZ") {
            Err(CodecError::ForeignSymbol { pos, ch }) => assert_eq!((pos, ch), (2, 'I')),
            other => panic!("{other:?}"),
        }
        assert_eq!(decode_text("z").unwrap(), decode_text("Z").unwrap());
    }

    #[test]
    fn alphabet_is_distinct_and_excludes_lookalikes() {
        let set: std::collections::HashSet<_> = ALPHABET.iter().collect();
        assert_eq!(set.len(), 32);
        for c in b"ILOU" {
            assert!(!ALPHABET.contains(c));
        }
    }

    #[test]
    fn profile_rejects_duplicate_names() {
        let p = ObjectProfile::new(ObjectKind::Merchandise, "acme").with("serial", "1").unwrap();
        assert!(p.with("serial", "2").is_err());
    }

    #[test]
    fn kinds_parse_back() {
        for k in ObjectKind::ALL {
            assert_eq!(k.to_string().parse::<ObjectKind>().unwrap(), k);
        }
    }

    proptest! {
        #[test]
        fn encode_decode_inverse(v in proptest::collection::vec(any::<bool>(), 0..40usize)) {
            let len = v.len() / 5 * 5;
            let bits = BitString::new(v[..len].to_vec());
            let text = encode_bits(&bits).unwrap();
            prop_assert_eq!(text.len(), len / 5);
            prop_assert!(text.bytes().all(|c| ALPHABET.contains(&c)));
            prop_assert_eq!(decode_text(&text).unwrap(), bits);
        }

        #[test]
        fn serialization_distinguishes_profiles(
            a in proptest::collection::vec(("[a-c]{0,2}", "[a-c]{0,2}"), 0..3),
            b in proptest::collection::vec(("[a-c]{0,2}", "[a-c]{0,2}"), 0..3),
            sa in "[a-b]{0,2}",
            sb in "[a-b]{0,2}",
        ) {
            let build = |s: &str, attrs: &[(String, String)]| {
                let mut p = ObjectProfile::new(ObjectKind::Document, s);
                for (n, v) in attrs {
                    if p.push(n.clone(), v.clone()).is_err() {
                        return None;
                    }
                }
                Some(p)
            };
            if let (Some(pa), Some(pb)) = (build(&sa, &a), build(&sb, &b)) {
                prop_assert_eq!(pa.canonical_bytes() == pb.canonical_bytes(), pa == pb);
            }
        }
    }
}
