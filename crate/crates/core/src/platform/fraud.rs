use std::collections::BTreeMap;
use std::fmt;

use super::{Observation, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlertReason {
    /// One identity accepted in two or more regions within the window.
    RepeatVerifyOverlap,
    /// Repeated rejections of one identity.
    VerifyFailureBurst,
    /// Repeated queries for an identity nobody registered.
    UnknownIdBurst,
}

impl AlertReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AlertReason::RepeatVerifyOverlap => "repeat-verify-overlap",
            AlertReason::VerifyFailureBurst => "verify-failure-burst",
            AlertReason::UnknownIdBurst => "unknown-id-burst",
        }
    }
}

impl fmt::Display for AlertReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FraudAlert {
    pub bfid: String,
    pub reason: AlertReason,
    /// Log sequence numbers of the observations behind the alert.
    pub evidence: Vec<u64>,
}

impl fmt::Display for FraudAlert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ev: Vec<String> = self.evidence.iter().map(u64::to_string).collect();
        write!(f, "ALERT {} {} {}", self.bfid, self.reason, ev.join(","))
    }
}

/// At most one alert per identity and reason, ordered by identity then
/// reason.
pub(crate) fn scan(observations: &[Observation], window: u64, threshold: usize) -> Vec<FraudAlert> {
    let mut by_bfid: BTreeMap<&str, Vec<&Observation>> = BTreeMap::new();
    for o in observations {
        by_bfid.entry(&o.bfid).or_default().push(o);
    }
    let mut out = Vec::new();
    for (bfid, mut obs) in by_bfid {
        obs.sort_by_key(|o| (o.ts, o.seq));
        let mut push = |reason, evidence: Option<Vec<u64>>| {
            if let Some(evidence) = evidence {
                out.push(FraudAlert { bfid: bfid.to_string(), reason, evidence });
            }
        };
        push(AlertReason::RepeatVerifyOverlap, overlap(&obs, window));
        push(AlertReason::VerifyFailureBurst, burst(&obs, Verdict::Reject, window, threshold));
        push(AlertReason::UnknownIdBurst, burst(&obs, Verdict::Unknown, window, threshold));
    }
    out
}

fn overlap(obs: &[&Observation], window: u64) -> Option<Vec<u64>> {
    let acc: Vec<_> = obs
        .iter()
        .filter(|o| o.verdict == Verdict::Accept && o.region != "-")
        .collect();
    for (j, b) in acc.iter().enumerate() {
        for a in acc[..j].iter().rev() {
            if b.ts - a.ts > window {
                break;
            }
            if a.region != b.region {
                return Some(vec![a.seq, b.seq]);
            }
        }
    }
    None
}

fn burst(obs: &[&Observation], verdict: Verdict, window: u64, threshold: usize) -> Option<Vec<u64>> {
    let hits: Vec<_> = obs.iter().filter(|o| o.verdict == verdict).collect();
    if threshold == 0 || hits.len() < threshold {
        return None;
    }
    (0..=hits.len() - threshold)
        .find(|&i| hits[i + threshold - 1].ts - hits[i].ts <= window)
        .map(|i| hits[i..i + threshold].iter().map(|o| o.seq).collect())
}
