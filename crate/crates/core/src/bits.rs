use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {0:?} at position {1}")]
    BadChar(char, usize),
    #[error("value needs {needed} bits, width is {width}")]
    Overflow { needed: u64, width: usize },
}

/// A bit string `b_1 .. b_n`, with `b_1` the most significant bit.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    /// The first `len` bits of `bytes` (MSB first), zero-padded on the right.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Self {
        BitString(
            (0..len)
                .map(|i| bytes.get(i / 8).is_some_and(|b| b >> (7 - i % 8) & 1 == 1))
                .collect(),
        )
    }

    /// Big-endian `width`-bit representation of `value`.
    pub fn from_biguint(value: &BigUint, width: usize) -> Result<Self, BitsError> {
        let needed = value.bits();
        if needed > width as u64 {
            return Err(BitsError::Overflow { needed, width });
        }
        Ok(BitString(
            (0..width).map(|i| value.bit((width - 1 - i) as u64)).collect(),
        ))
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::default();
        for (i, &b) in self.0.iter().rev().enumerate() {
            if b {
                v.set_bit(i as u64, true);
            }
        }
        v
    }

    /// Packs into bytes, MSB first, last byte zero-padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.0.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| !b)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        BitString(self.0.iter().chain(other.0.iter()).copied().collect())
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitsError::BadChar(other, i)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Lowercase hex of `value`, left-padded to `width` characters.
pub fn hex_padded(value: &BigUint, width: usize) -> String {
    format!("{:0>width$}", value.to_str_radix(16), width = width)
}

pub fn parse_hex(s: &str) -> Option<BigUint> {
    if s.is_empty() {
        return None;
    }
    BigUint::parse_bytes(s.as_bytes(), 16)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let b: BitString = "01010100".parse().unwrap();
        assert_eq!(b.to_string(), "01010100");
        assert_eq!(b.to_biguint(), BigUint::from(0x54u32));
        assert_eq!(b.to_bytes(), vec![0x54]);
        assert_eq!(BitString::from_bytes(&[0x54], 8), b);
        assert!("0120".parse::<BitString>().is_err());
    }

    #[test]
    fn biguint_width() {
        let b = BitString::from_biguint(&BigUint::from(5u32), 6).unwrap();
        assert_eq!(b.to_string(), "000101");
        assert!(BitString::from_biguint(&BigUint::from(64u32), 6).is_err());
    }

    #[test]
    fn hex_helpers() {
        assert_eq!(hex_padded(&BigUint::from(0xabu32), 6), "0000ab");
        assert_eq!(parse_hex("00ff"), Some(BigUint::from(255u32)));
        assert_eq!(parse_hex("zz"), None);
        assert_eq!(parse_hex(""), None);
    }
}
