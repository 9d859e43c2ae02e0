//! Line-oriented key files.
//!
//! ```text
//! [common]
//! interp w-gcd=dD,...
//! n 8
//! sigma 5d2f1
//! S 1b3
//! T 7
//! M bad3f1
//! factor 2 1
//! ...
//! [public]
//! alpha ...
//! beta ...
//! C ...            (n lines)
//! [private]
//! A 1f3            (n lines)
//! ell -13          (n lines, signed decimal)
//! W ...
//! delta ...
//! D ...
//! d ...
//! h_bar ...
//! ```
//!
//! Big integers are lowercase hex without prefix.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{CommonParams, ParameterProfile, PrivateKey, ProfileKind, PublicKey, ReesseError};
use crate::bits::parse_hex;
use crate::numeric::{factor_small, CoprimeSequence, Factor, FactoredModulus};

const A_BOUND: u64 = 863;

/// Parsed contents of a key file; blocks not present are `None`.
#[derive(Debug, Clone)]
pub struct KeyFile {
    pub common: CommonParams,
    pub public: Option<PublicKey>,
    pub private: Option<PrivateKey>,
}

impl KeyFile {
    pub fn to_text(&self) -> String {
        let mut out = common_text(&self.common);
        if let Some(p) = &self.public {
            out.push_str(&public_text(p));
        }
        if let Some(p) = &self.private {
            out.push_str(&private_text(p));
        }
        out
    }

    /// Profile implied by the key material, for auditing.
    pub fn profile(&self) -> Result<ParameterProfile, ReesseError> {
        let private = self
            .private
            .as_ref()
            .ok_or_else(|| ReesseError::Format("no private block".into()))?;
        let small = |x: &BigUint, what: &str| {
            x.to_u64().ok_or_else(|| ReesseError::Format(format!("{what} too large")))
        };
        let big_d = factor_small(&private.big_d)
            .ok_or_else(|| ReesseError::Format("D does not factor".into()))?;
        let d = small(&private.d, "d")?;
        let t = small(&self.common.t, "T")?;
        let m = self.common.m();
        let n = self.common.n;
        let mut p = ParameterProfile::custom("from-key", ProfileKind::Toy, m, n, d, big_d, t)?;
        if p.published_range_failures().is_empty() {
            p.kind = ProfileKind::Paper;
            p.name = format!("paper{m}");
            p.exponent_target = 256;
            p.s_inv_bits = 16;
        }
        Ok(p)
    }
}

fn common_text(c: &CommonParams) -> String {
    let mut s = String::from("[common]\n");
    let _ = writeln!(s, "interp {}", c.interp);
    let _ = writeln!(s, "n {}", c.n);
    let _ = writeln!(s, "sigma {:x}", c.sigma);
    let _ = writeln!(s, "S {:x}", c.s);
    let _ = writeln!(s, "T {:x}", c.t);
    let _ = writeln!(s, "M {:x}", c.modulus());
    for f in c.ctx.factors() {
        let _ = writeln!(s, "factor {:x} {}", f.prime, f.exp);
    }
    s
}

fn public_text(p: &PublicKey) -> String {
    let mut s = String::from("[public]\n");
    let _ = writeln!(s, "alpha {:x}", p.alpha);
    let _ = writeln!(s, "beta {:x}", p.beta);
    for c in &p.c {
        let _ = writeln!(s, "C {c:x}");
    }
    s
}

fn private_text(p: &PrivateKey) -> String {
    let mut s = String::from("[private]\n");
    for a in p.a.items() {
        let _ = writeln!(s, "A {a:x}");
    }
    for l in &p.ell {
        let _ = writeln!(s, "ell {l}");
    }
    let _ = writeln!(s, "W {:x}", p.w);
    let _ = writeln!(s, "delta {:x}", p.delta);
    let _ = writeln!(s, "D {:x}", p.big_d);
    let _ = writeln!(s, "d {:x}", p.d);
    let _ = writeln!(s, "h_bar {:x}", p.h_bar);
    s
}

#[derive(Default)]
struct Block<'a> {
    lines: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Block<'a> {
    fn all(&self, key: &str) -> impl Iterator<Item = (usize, &'a str)> + '_ {
        let key = key.to_string();
        self.lines.iter().filter(move |(_, k, _)| *k == key).map(|(i, _, v)| (*i, *v))
    }

    fn one(&self, key: &str) -> Result<(usize, &'a str), ReesseError> {
        let mut it = self.all(key);
        let first = it.next().ok_or_else(|| ReesseError::Format(format!("missing {key}")))?;
        if it.next().is_some() {
            return Err(ReesseError::Format(format!("duplicate {key}")));
        }
        Ok(first)
    }

    fn hex(&self, key: &str) -> Result<BigUint, ReesseError> {
        let (i, v) = self.one(key)?;
        hex_at(i, key, v)
    }

    fn hex_list(&self, key: &str) -> Result<Vec<BigUint>, ReesseError> {
        self.all(key).map(|(i, v)| hex_at(i, key, v)).collect()
    }
}

fn hex_at(line: usize, key: &str, v: &str) -> Result<BigUint, ReesseError> {
    parse_hex(v).ok_or_else(|| ReesseError::Format(format!("line {line}: {key} is not hex: {v:?}")))
}

/// Parses a key file holding a `common` block and any of `public`, `private`.
pub fn parse_key_file(text: &str) -> Result<KeyFile, ReesseError> {
    let mut blocks: [Option<Block>; 3] = [None, None, None];
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let idx = match name {
                "common" => 0,
                "public" => 1,
                "private" => 2,
                _ => return Err(ReesseError::Format(format!("line {}: unknown block {name}", i + 1))),
            };
            if blocks[idx].is_some() {
                return Err(ReesseError::Format(format!("line {}: repeated block {name}", i + 1)));
            }
            blocks[idx] = Some(Block::default());
            current = Some(idx);
            continue;
        }
        let idx = current.ok_or_else(|| ReesseError::Format(format!("line {}: outside any block", i + 1)))?;
        let (k, v) = line.split_once(' ').unwrap_or((line, ""));
        blocks[idx].as_mut().expect("opened").lines.push((i + 1, k, v.trim()));
    }
    let [common, public, private] = blocks;
    let common = common.ok_or_else(|| ReesseError::Format("missing [common] block".into()))?;

    let interp = common.one("interp")?.1.parse().map_err(ReesseError::Format)?;
    let n: usize = common
        .one("n")?
        .1
        .parse()
        .map_err(|_| ReesseError::Format("n is not a number".into()))?;
    let modulus = common.hex("M")?;
    let factors = common
        .all("factor")
        .map(|(i, v)| {
            let (p, e) = v
                .split_once(' ')
                .ok_or_else(|| ReesseError::Format(format!("line {i}: factor needs prime and exponent")))?;
            let e: u32 = e
                .trim()
                .parse()
                .map_err(|_| ReesseError::Format(format!("line {i}: bad exponent")))?;
            Ok(Factor::new(hex_at(i, "factor", p)?, e))
        })
        .collect::<Result<Vec<_>, ReesseError>>()?;
    let ctx = FactoredModulus::from_parts(modulus, factors)
        .ok_or_else(|| ReesseError::Format("factors do not multiply to M-1".into()))?;
    let common_params = CommonParams {
        sigma: common.hex("sigma")?,
        n,
        s: common.hex("S")?,
        t: common.hex("T")?,
        ctx,
        interp,
    };

    let public = public
        .map(|b| -> Result<PublicKey, ReesseError> {
            let c = b.hex_list("C")?;
            if c.len() != n {
                return Err(ReesseError::Format(format!("{} C lines, expected {n}", c.len())));
            }
            Ok(PublicKey { c, alpha: b.hex("alpha")?, beta: b.hex("beta")? })
        })
        .transpose()?;

    let private = private
        .map(|b| -> Result<PrivateKey, ReesseError> {
            let a = b
                .hex_list("A")?
                .iter()
                .map(|x| x.to_u64().ok_or_else(|| ReesseError::Format("A_i too large".into())))
                .collect::<Result<Vec<_>, _>>()?;
            if a.len() != n {
                return Err(ReesseError::Format(format!("{} A lines, expected {n}", a.len())));
            }
            let a = CoprimeSequence::new(a, A_BOUND)
                .ok_or_else(|| ReesseError::Format("A is not a coprime sequence in {2..863}".into()))?;
            let ell = b
                .all("ell")
                .map(|(i, v)| v.parse::<i64>().map_err(|_| ReesseError::Format(format!("line {i}: bad ell"))))
                .collect::<Result<Vec<_>, _>>()?;
            if ell.len() != n {
                return Err(ReesseError::Format(format!("{} ell lines, expected {n}", ell.len())));
            }
            Ok(PrivateKey {
                a,
                ell,
                w: b.hex("W")?,
                delta: b.hex("delta")?,
                big_d: b.hex("D")?,
                d: b.hex("d")?,
                h_bar: b.hex("h_bar")?,
            })
        })
        .transpose()?;

    Ok(KeyFile { common: common_params, public, private })
}
