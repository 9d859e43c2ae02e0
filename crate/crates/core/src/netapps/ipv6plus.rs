use std::fmt;
use std::net::Ipv6Addr;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rand::Rng;
use thiserror::Error;

use crate::bits::BitString;
use crate::codec::{confect_bfid, Bfid, CodecError, Confection, Mode, ObjectKind, ObjectProfile};
use crate::digest::Digest;
use crate::platform::{ClientError, VerificationService, VerifyOutcome};
use crate::reesse::{CommonParams, InterpretationConfig, PrivateKey};

pub const INTERFACE_BITS: u32 = 80;
const INTERFACE_MASK: u128 = (1 << INTERFACE_BITS) - 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AddressError {
    #[error("layout ({0},{1}): routing must be 24..=32 bits, subnet 8..=16, summing to 40 (total {2} of 128)")]
    BadLayout(u8, u8, u32),
    #[error("{field} {value:#x} does not fit in {bits} bits")]
    Overflow { field: &'static str, value: u128, bits: u32 },
    #[error("cannot parse address {0:?}")]
    Syntax(String),
}

/// Widths of the routing indicator and the subnet id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout {
    routing_bits: u8,
    subnet_bits: u8,
}

impl Layout {
    pub fn new(routing_bits: u8, subnet_bits: u8) -> Result<Self, AddressError> {
        let total = 8 + routing_bits as u32 + subnet_bits as u32 + INTERFACE_BITS;
        if !(24..=32).contains(&routing_bits) || !(8..=16).contains(&subnet_bits) || total != 128 {
            return Err(AddressError::BadLayout(routing_bits, subnet_bits, total));
        }
        Ok(Layout { routing_bits, subnet_bits })
    }

    pub fn routing_bits(self) -> u8 {
        self.routing_bits
    }

    pub fn subnet_bits(self) -> u8 {
        self.subnet_bits
    }

    /// Every valid layout, (24,16) through (32,8).
    pub fn all() -> impl Iterator<Item = Layout> {
        (24..=32).map(|r| Layout { routing_bits: r, subnet_bits: 40 - r })
    }
}

impl FromStr for Layout {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AddressError::Syntax(format!("layout {s:?}"));
        let (r, w) = s.split_once(',').ok_or_else(bad)?;
        Layout::new(r.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.routing_bits, self.subnet_bits)
    }
}

/// Nation id, routing indicator, subnet id and an 80-bit interface id,
/// packed big-endian in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ipv6PlusAddress {
    pub nation: u8,
    pub routing: u32,
    pub subnet: u16,
    pub interface_id: u128,
    pub layout: Layout,
}

fn fits(field: &'static str, value: u128, bits: u32) -> Result<(), AddressError> {
    if bits < 128 && value >> bits != 0 {
        return Err(AddressError::Overflow { field, value, bits });
    }
    Ok(())
}

impl Ipv6PlusAddress {
    pub fn new(
        nation: u8,
        routing: u32,
        subnet: u16,
        interface_id: u128,
        layout: Layout,
    ) -> Result<Self, AddressError> {
        let a = Ipv6PlusAddress { nation, routing, subnet, interface_id, layout };
        a.check()?;
        Ok(a)
    }

    fn check(&self) -> Result<(), AddressError> {
        fits("routing", self.routing as u128, self.layout.routing_bits as u32)?;
        fits("subnet", self.subnet as u128, self.layout.subnet_bits as u32)?;
        fits("interface id", self.interface_id, INTERFACE_BITS)
    }

    pub fn pack(&self) -> Result<u128, AddressError> {
        self.check()?;
        let s = self.layout.subnet_bits as u32;
        Ok((self.nation as u128) << 120
            | (self.routing as u128) << (INTERFACE_BITS + s)
            | (self.subnet as u128) << INTERFACE_BITS
            | self.interface_id)
    }

    pub fn parse(value: u128, layout: Layout) -> Self {
        let s = layout.subnet_bits as u32;
        let r = layout.routing_bits as u32;
        Ipv6PlusAddress {
            nation: (value >> 120) as u8,
            routing: ((value >> (INTERFACE_BITS + s)) & ((1 << r) - 1)) as u32,
            subnet: ((value >> INTERFACE_BITS) & ((1 << s) - 1)) as u16,
            interface_id: value & INTERFACE_MASK,
            layout,
        }
    }

    pub fn to_ipv6(&self) -> Result<Ipv6Addr, AddressError> {
        Ok(Ipv6Addr::from(self.pack()?))
    }

    pub fn from_ipv6(addr: Ipv6Addr, layout: Layout) -> Self {
        Self::parse(u128::from(addr), layout)
    }

    /// The interface id as a 16-symbol identity.
    pub fn interface_bfid(&self) -> Bfid {
        let bits = BitString::from_biguint(&self.interface_id.into(), INTERFACE_BITS as usize)
            .expect("interface id fits 80 bits");
        Bfid::from_bits(bits).expect("80 is a multiple of 5")
    }
}

impl fmt::Display for Ipv6PlusAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pack() {
            Ok(v) => write!(f, "{v:032x} layout={}", self.layout),
            Err(e) => write!(f, "<invalid: {e}>"),
        }
    }
}

impl FromStr for Ipv6PlusAddress {
    type Err = AddressError;

    /// `<32 hex digits or colon form> layout=<r>,<s>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AddressError::Syntax(s.to_string());
        let mut parts = s.split_whitespace();
        let addr = parts.next().ok_or_else(bad)?;
        let layout: Layout = parts
            .next()
            .and_then(|l| l.strip_prefix("layout="))
            .ok_or_else(bad)?
            .parse()?;
        if parts.next().is_some() {
            return Err(bad());
        }
        let value = if addr.len() == 32 && !addr.contains(':') {
            u128::from_str_radix(addr, 16).map_err(|_| bad())?
        } else {
            u128::from(addr.parse::<Ipv6Addr>().map_err(|_| bad())?)
        };
        Ok(Self::parse(value, layout))
    }
}

/// Host attributes bound into an interface id.
pub fn host_interface_profile(
    administration: &str,
    domain: &str,
    eui64: &str,
    nation: u8,
    routing: u32,
    subnet: u16,
) -> Result<ObjectProfile, CodecError> {
    ObjectProfile::new(ObjectKind::HostInterface, administration)
        .with("domain", domain)?
        .with("eui64", eui64)?
        .with("nation", nation.to_string())?
        .with("routing", routing.to_string())?
        .with("subnet", subnet.to_string())
}

/// Signs the host profile in escrow mode under an 80-bit modulus; the
/// interface id is the identity's 80 bits.
pub fn make_interface_id<R: Rng + ?Sized>(
    admin: &PrivateKey,
    common: &CommonParams,
    host: &ObjectProfile,
    hash: &dyn Digest,
    interp: &InterpretationConfig,
    rng: &mut R,
) -> Result<(u128, Confection), CodecError> {
    if host.kind != ObjectKind::HostInterface {
        return Err(CodecError::Profile(format!("expected a host-interface profile, got {}", host.kind)));
    }
    if common.m() != INTERFACE_BITS as u64 {
        return Err(CodecError::Profile(format!(
            "interface ids need an {INTERFACE_BITS}-bit modulus, key has {}",
            common.m()
        )));
    }
    let conf = confect_bfid(admin, common, host, hash, Mode::Escrow, interp, rng)?;
    let iid = conf.bfid.bits().to_biguint().to_u128().expect("80 bits");
    Ok((iid, conf))
}

/// Asks the platform about the address's interface id.
pub fn validate_source_address(
    addr: &Ipv6PlusAddress,
    service: &mut dyn VerificationService,
    region: Option<&str>,
) -> Result<VerifyOutcome, ClientError> {
    service.verify(addr.interface_bfid().text(), None, region, None)
}
