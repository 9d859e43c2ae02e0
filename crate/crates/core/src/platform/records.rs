use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use super::{PlatformError, Stage};
use crate::bits::BitString;
use crate::reesse::{CommonParams, PublicKey};

/// A registered subject and its public key.
#[derive(Debug, Clone)]
pub struct KeyRecord {
    pub subject_id: String,
    /// The public key file as submitted.
    pub key_text: String,
    pub common: CommonParams,
    pub public: PublicKey,
    /// Logical clock at registration.
    pub registered_at: u64,
    pub seq: u64,
}

/// A registered identity.
#[derive(Debug, Clone)]
pub struct IdentityRecord {
    pub bfid: String,
    pub subject_id: String,
    pub digest: BitString,
    /// Escrowed `U`; `None` for full-mode identities.
    pub u: Option<BigUint>,
    pub source_info: String,
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: u64,
    pub bfid: String,
    pub stage: Stage,
    pub region: String,
    pub ts: u64,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EVENT {} {} {} {} {}", self.seq, self.bfid, self.stage, self.region, self.ts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Accept => "ACCEPT",
            Verdict::Reject => "REJECT",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = PlatformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ACCEPT" => Ok(Verdict::Accept),
            "REJECT" => Ok(Verdict::Reject),
            "UNKNOWN" => Ok(Verdict::Unknown),
            _ => Err(PlatformError::bad_request(format!("unknown verdict {s:?}"))),
        }
    }
}

/// One answered VERIFY, as kept in the log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub seq: u64,
    pub bfid: String,
    pub verdict: Verdict,
    /// `-` when the inquirer gave none.
    pub region: String,
    pub ts: u64,
}

impl Observation {
    /// The log line (without sequence number).
    pub fn log_line(&self) -> String {
        format!("OBSERVE {} {} {} {}", self.bfid, self.verdict, self.region, self.ts)
    }

    pub(crate) fn parse_log_line(seq: u64, line: &str) -> Result<Self, PlatformError> {
        let t: Vec<&str> = line.split(' ').collect();
        if t.len() != 5 || t[0] != "OBSERVE" {
            return Err(PlatformError::bad_request(format!("bad observation {line:?}")));
        }
        Ok(Observation {
            seq,
            bfid: t[1].to_string(),
            verdict: t[2].parse()?,
            region: t[3].to_string(),
            ts: t[4].parse().map_err(|_| PlatformError::bad_request("bad observation ts"))?,
        })
    }
}
