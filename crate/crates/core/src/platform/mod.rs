//! The verification platform: a registry of subjects and identities, trace
//! events, verification observations and fraud scanning, persisted as an
//! append-only log of request frames.
//!
//! The service is transport-agnostic ([`Platform::handle_line`]); [`server`]
//! puts it behind TCP and [`client`] talks to it.

pub mod client;
mod fraud;
pub mod protocol;
mod records;
pub mod server;
mod service;

pub use client::{ClientError, PlatformClient, VerificationService, VerifyOutcome};
pub use fraud::{AlertReason, FraudAlert};
pub use protocol::{frames, Request, Stage};
pub use records::{IdentityRecord, KeyRecord, Observation, TraceEvent, Verdict};
pub use service::{Platform, PlatformConfig};

use std::fmt;

/// An `ERR <code> <msg>` response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlatformError {
    pub code: &'static str,
    pub message: String,
}

impl PlatformError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        PlatformError { code, message: message.into() }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new("bad-request", message)
    }

    /// The response line.
    pub fn to_line(&self) -> String {
        format!("ERR {} {}", self.code, self.message.replace(['\n', '\r'], " "))
    }
}

impl fmt::Display for PlatformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for PlatformError {}

impl From<std::io::Error> for PlatformError {
    fn from(e: std::io::Error) -> Self {
        PlatformError::new("io", e.to_string())
    }
}
