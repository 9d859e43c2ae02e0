//! Lightweight asymmetric identities (BFIDs).
//!
//! * [`numeric`]: number theory on big naturals.
//! * [`juna`]: the Juna non-iterative hash.
//! * [`reesse`]: the optimized REESSE1+ signature scheme, its constraint
//!   auditor and the round-trip prober.
//! * [`codec`]: 16-22 character identity strings and BFID confection.
//! * [`platform`]: the verification platform service and its wire protocol.
//! * [`netapps`]: IPv6+ addresses and dynamic passwords.

pub mod bits;
pub mod codec;
pub mod digest;
pub mod juna;
pub mod netapps;
pub mod numeric;
pub mod platform;
pub mod reesse;
