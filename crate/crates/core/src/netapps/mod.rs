//! Network applications of BFIDs: IPv6+ addresses whose interface
//! identifier is an identity, and one-time login passwords.

mod dynpass;
mod ipv6plus;

pub use dynpass::{check_dynamic_password, gen_dynamic_password, LoginContext};
pub use ipv6plus::{
    host_interface_profile, make_interface_id, validate_source_address, AddressError, Ipv6PlusAddress,
    Layout, INTERFACE_BITS,
};
