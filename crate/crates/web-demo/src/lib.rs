//! Browser bindings for three pure operations: bit shadows, identity
//! encode/decode and IPv6+ packing. `www/index.html` drives them.

use bfid_core::bits::BitString;
use bfid_core::codec::{decode_text, encode_bits};
use bfid_core::juna::{bit_long_shadow, bit_shadow};
use bfid_core::netapps::{Ipv6PlusAddress, Layout};
use wasm_bindgen::prelude::*;

fn parse_bits(s: &str) -> Result<BitString, String> {
    let bits: Result<Vec<bool>, String> = s
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("{other:?} is not a bit")),
        })
        .collect();
    Ok(BitString::new(bits?))
}

fn digits(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// Shadow and long-shadow lines for a bit string.
pub fn shadows_text(bits: &str) -> Result<String, String> {
    let b = parse_bits(bits)?;
    let s = bit_shadow(&b).map_err(|e| e.to_string())?;
    let long = bit_long_shadow(&b).map_err(|e| e.to_string())?;
    Ok(format!("shadow {}\nlong   {}", digits(s.values()), digits(&long)))
}

/// Identity text for a bit string whose length is a multiple of 5.
pub fn encode_text(bits: &str) -> Result<String, String> {
    encode_bits(&parse_bits(bits)?).map_err(|e| e.to_string())
}

/// Bits of an identity text.
pub fn decode_to_bits(text: &str) -> Result<String, String> {
    let b = decode_text(text.trim()).map_err(|e| e.to_string())?;
    Ok(b.iter().map(|x| if x { '1' } else { '0' }).collect())
}

/// Packed address for the given fields; `iid_hex` is the 80-bit interface id.
pub fn pack_text(nation: u8, routing: u32, subnet: u16, iid_hex: &str, layout: &str) -> Result<String, String> {
    let layout: Layout = layout.parse().map_err(|e| format!("{e}"))?;
    let iid = u128::from_str_radix(iid_hex.trim(), 16).map_err(|_| "interface id is not hex".to_string())?;
    let a = Ipv6PlusAddress::new(nation, routing, subnet, iid, layout).map_err(|e| e.to_string())?;
    let ip = a.to_ipv6().map_err(|e| e.to_string())?;
    Ok(format!("{a}\n{ip}\nidentity {}", a.interface_bfid()))
}

#[wasm_bindgen]
pub fn shadows(bits: &str) -> Result<String, JsError> {
    shadows_text(bits).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bfid_encode(bits: &str) -> Result<String, JsError> {
    encode_text(bits).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bfid_decode(text: &str) -> Result<String, JsError> {
    decode_to_bits(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ipv6plus_pack(nation: u8, routing: u32, subnet: u16, iid_hex: &str, layout: &str) -> Result<String, JsError> {
    pack_text(nation, routing, subnet, iid_hex, layout).map_err(|e| JsError::new(&e))
}
