use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use super::fraud::{scan, FraudAlert};
use super::protocol::{hex_decode, quote, request_digest, Request};
use super::{IdentityRecord, KeyRecord, Observation, PlatformError, TraceEvent, Verdict};
use crate::bits::{hex_padded, parse_hex, BitString};
use crate::codec::{signature_from_bfid, Bfid};
use crate::reesse::{parse_key_file, public_key_audit, verify, verify_digest, Signature};

#[derive(Debug, Clone)]
pub struct PlatformConfig {
    /// Observations that make a burst.
    pub burst_threshold: usize,
    /// Window used by callers that do not give one.
    pub default_window: u64,
}

impl Default for PlatformConfig {
    fn default() -> Self {
        PlatformConfig { burst_threshold: 5, default_window: 86_400 }
    }
}

#[derive(Debug, Default)]
struct State {
    subjects: BTreeMap<String, KeyRecord>,
    identities: BTreeMap<String, IdentityRecord>,
    events: BTreeMap<String, Vec<TraceEvent>>,
    observations: Vec<Observation>,
    /// Largest timestamp seen; the default for VERIFY without `ts=`.
    clock: u64,
    seq: u64,
}

enum Change {
    Subject(KeyRecord),
    Identity(IdentityRecord),
    Event(TraceEvent),
    Observe(Observation),
}

impl Change {
    fn ts(&self) -> Option<u64> {
        match self {
            Change::Event(e) => Some(e.ts),
            Change::Observe(o) => Some(o.ts),
            _ => None,
        }
    }
}

struct Prepared {
    log_line: String,
    change: Change,
    response: String,
}

/// The platform service. Reads share a lock; mutations are serialized and
/// acknowledged only after their log line is synced.
pub struct Platform {
    config: PlatformConfig,
    state: RwLock<State>,
    log: Mutex<Option<File>>,
    path: Option<PathBuf>,
}

impl Platform {
    /// A platform without persistence.
    pub fn in_memory(config: PlatformConfig) -> Self {
        Platform { config, state: RwLock::new(State::default()), log: Mutex::new(None), path: None }
    }

    /// Opens (or creates) a log, replays it, and appends to it afterwards.
    /// A partial last line left by an interrupted write is truncated.
    pub fn open(path: impl AsRef<Path>, config: PlatformConfig) -> Result<Self, PlatformError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)
            .map_err(|e| PlatformError::new("bad-log", e.to_string()))?;
        let complete = text.rfind('\n').map_or(0, |i| i + 1);
        if complete < text.len() {
            file.set_len(complete as u64)?;
            file.seek(SeekFrom::End(0))?;
        }
        let mut state = State::default();
        for (i, line) in BufReader::new(&text.as_bytes()[..complete]).lines().enumerate() {
            let line = line?;
            let p = prepare_log_line(&state, &line).map_err(|e| {
                PlatformError::new("bad-log", format!("line {}: {}", i + 1, e))
            })?;
            state.apply(p.change);
        }
        Ok(Platform {
            config,
            state: RwLock::new(state),
            log: Mutex::new(Some(file)),
            path: Some(path),
        })
    }

    pub fn config(&self) -> &PlatformConfig {
        &self.config
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Handles one request frame; returns the response, possibly several
    /// lines joined by `\n`, without a trailing newline.
    pub fn handle_line(&self, line: &str) -> String {
        match Request::parse(line).and_then(|r| self.handle(&r)) {
            Ok(s) => s,
            Err(e) => e.to_line(),
        }
    }

    pub fn handle(&self, req: &Request) -> Result<String, PlatformError> {
        match req {
            Request::Trace { bfid } => {
                let bfid = canonical_bfid(bfid)?;
                let st = self.read();
                if !st.identities.contains_key(&bfid) {
                    return Err(PlatformError::new("unknown-bfid", bfid));
                }
                let evs = st.events.get(&bfid).map(Vec::as_slice).unwrap_or(&[]);
                Ok(with_count(evs.iter().map(ToString::to_string)))
            }
            Request::Scan { window } => Ok(with_count(self.scan(*window).iter().map(ToString::to_string))),
            _ => self.mutate(req),
        }
    }

    fn mutate(&self, req: &Request) -> Result<String, PlatformError> {
        let mut log = self.log.lock().unwrap_or_else(|e| e.into_inner());
        let p = {
            let st = self.read();
            prepare(&st, req)?
        };
        if let Some(f) = log.as_mut() {
            f.write_all(format!("{}\n", p.log_line).as_bytes())?;
            f.sync_data()?;
        }
        self.state.write().unwrap_or_else(|e| e.into_inner()).apply(p.change);
        Ok(p.response)
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, State> {
        self.state.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn scan(&self, window: u64) -> Vec<FraudAlert> {
        scan(&self.read().observations, window, self.config.burst_threshold)
    }

    pub fn subject(&self, id: &str) -> Option<KeyRecord> {
        self.read().subjects.get(id).cloned()
    }

    pub fn identity(&self, bfid: &str) -> Option<IdentityRecord> {
        self.read().identities.get(&bfid.to_ascii_uppercase()).cloned()
    }

    pub fn observations(&self) -> Vec<Observation> {
        self.read().observations.clone()
    }

    /// Number of log entries applied.
    pub fn seq(&self) -> u64 {
        self.read().seq
    }

    /// Deterministic text dump of the whole state.
    pub fn snapshot(&self) -> String {
        let st = self.read();
        let mut out = format!("seq {}\nclock {}\n", st.seq, st.clock);
        for k in st.subjects.values() {
            out += &format!(
                "SUBJECT {} seq={} at={} key={}\n",
                k.subject_id,
                k.seq,
                k.registered_at,
                super::protocol::hex_encode(k.key_text.as_bytes())
            );
        }
        for r in st.identities.values() {
            out += &format!(
                "IDENTITY {} {} {} {} {} seq={}\n",
                r.bfid,
                r.subject_id,
                hex_padded(&r.digest.to_biguint(), r.digest.len().div_ceil(4)),
                r.u.as_ref().map_or("-".to_string(), |u| format!("{u:x}")),
                quote(&r.source_info),
                r.seq
            );
        }
        for e in st.events.values().flatten() {
            out += &format!("{e}\n");
        }
        for o in &st.observations {
            out += &format!("{} {}\n", o.seq, o.log_line());
        }
        out
    }
}

impl State {
    fn apply(&mut self, change: Change) {
        self.seq += 1;
        if let Some(ts) = change.ts() {
            self.clock = self.clock.max(ts);
        }
        match change {
            Change::Subject(k) => {
                self.subjects.insert(k.subject_id.clone(), k);
            }
            Change::Identity(r) => {
                self.identities.insert(r.bfid.clone(), r);
            }
            Change::Event(e) => self.events.entry(e.bfid.clone()).or_default().push(e),
            Change::Observe(o) => self.observations.push(o),
        }
    }
}

fn with_count(lines: impl Iterator<Item = String>) -> String {
    let lines: Vec<String> = lines.collect();
    let mut out = format!("OK {}", lines.len());
    for l in lines {
        out.push('\n');
        out += &l;
    }
    out
}

fn canonical_bfid(text: &str) -> Result<String, PlatformError> {
    Bfid::parse(text)
        .map(|b| b.text().to_string())
        .map_err(|e| PlatformError::new("malformed-bfid", e.to_string()))
}

fn prepare_log_line(st: &State, line: &str) -> Result<Prepared, PlatformError> {
    if line.starts_with("OBSERVE ") {
        let o = Observation::parse_log_line(st.seq + 1, line)?;
        return Ok(Prepared { log_line: line.to_string(), change: Change::Observe(o), response: String::new() });
    }
    let req = Request::parse(line)?;
    if matches!(req, Request::Verify { .. }) || !req.is_mutation() {
        return Err(PlatformError::bad_request("not a log entry"));
    }
    prepare(st, &req)
}

fn check_signature(
    req: &Request,
    record: &KeyRecord,
) -> Result<(), PlatformError> {
    let bad = || PlatformError::new("bad-signature", "request signature does not verify");
    let sig = Signature::from_hex(req.signature().unwrap_or(""), record.common.m()).ok_or_else(bad)?;
    let v = verify(
        &record.public,
        &record.common,
        req.body().as_bytes(),
        &sig,
        &request_digest(&record.common),
        &record.common.interp,
    )
    .map_err(|e| PlatformError::new("bad-signature", e.to_string()))?;
    if v.accepted {
        Ok(())
    } else {
        Err(bad())
    }
}

fn parse_digest(hex: &str, n: usize) -> Result<BitString, PlatformError> {
    let bad = || PlatformError::bad_request(format!("digest must be {} hex digits", n.div_ceil(4)));
    if hex.len() != n.div_ceil(4) {
        return Err(bad());
    }
    let v = parse_hex(hex).ok_or_else(bad)?;
    BitString::from_biguint(&v, n).map_err(|_| bad())
}

fn prepare(st: &State, req: &Request) -> Result<Prepared, PlatformError> {
    let seq = st.seq + 1;
    let (change, response) = match req {
        Request::RegisterSubject { id, key_blob, .. } => {
            if st.subjects.contains_key(id) {
                return Err(PlatformError::new("duplicate-subject", id.clone()));
            }
            let malformed = |m: String| PlatformError::new("malformed-key", m);
            let bytes = hex_decode(key_blob).ok_or_else(|| malformed("key blob is not hex".into()))?;
            let text = String::from_utf8(bytes).map_err(|_| malformed("key blob is not UTF-8".into()))?;
            let kf = parse_key_file(&text).map_err(|e| malformed(e.to_string()))?;
            if kf.private.is_some() {
                return Err(malformed("key blob carries private material".into()));
            }
            let public = kf.public.ok_or_else(|| malformed("no public block".into()))?;
            let audit = public_key_audit(&public, &kf.common);
            if let Some(f) = audit.failures().next() {
                return Err(PlatformError::new("bad-key", format!("{} {}", f.step, f.name)));
            }
            let record = KeyRecord {
                subject_id: id.clone(),
                key_text: text,
                common: kf.common,
                public,
                registered_at: st.clock,
                seq,
            };
            check_signature(req, &record)?;
            (Change::Subject(record), format!("OK REGISTERED {id}"))
        }
        Request::RegisterId { bfid, subject, digest, u, source, .. } => {
            let key = st
                .subjects
                .get(subject)
                .ok_or_else(|| PlatformError::new("unknown-subject", subject.clone()))?;
            let parsed = Bfid::parse(bfid).map_err(|e| PlatformError::new("malformed-bfid", e.to_string()))?;
            if st.identities.contains_key(parsed.text()) {
                return Err(PlatformError::new("duplicate-bfid", parsed.text()));
            }
            let m = key.common.m();
            let digest = parse_digest(digest, key.common.n)?;
            let u = match u {
                Some(h) => Some(parse_hex(h).ok_or_else(|| PlatformError::bad_request("U is not hex"))?),
                None => None,
            };
            if u.is_some() && parsed.len() != Bfid::escrow_len(m) {
                return Err(PlatformError::bad_request("escrowed U given for a full-mode identity"));
            }
            let bad_identity = |m: String| PlatformError::new("bad-identity", m);
            let sig = signature_from_bfid(&parsed, m, u.as_ref()).map_err(|e| bad_identity(e.to_string()))?;
            let v = verify_digest(&key.public, &key.common, &digest, &sig, &key.common.interp)
                .map_err(|e| bad_identity(e.to_string()))?;
            if !v.accepted {
                return Err(bad_identity("identity does not verify against the digest".into()));
            }
            check_signature(req, key)?;
            let record = IdentityRecord {
                bfid: parsed.text().to_string(),
                subject_id: subject.clone(),
                digest,
                u,
                source_info: source.clone(),
                seq,
            };
            (Change::Identity(record), format!("OK REGISTERED {}", parsed.text()))
        }
        Request::Verify { bfid, digest, region, ts } => {
            let bfid = canonical_bfid(bfid)?;
            let ts = ts.unwrap_or(st.clock);
            let (verdict, source) = match st.identities.get(&bfid) {
                None => (Verdict::Unknown, None),
                Some(rec) => {
                    let key = &st.subjects[&rec.subject_id];
                    let offered = digest.as_deref().map(|d| parse_digest(d, key.common.n)).transpose()?;
                    let sig = Bfid::parse(&bfid)
                        .ok()
                        .and_then(|b| signature_from_bfid(&b, key.common.m(), rec.u.as_ref()).ok());
                    let ok = offered.as_ref().is_none_or(|d| d == &rec.digest)
                        && sig.is_some_and(|s| {
                            verify_digest(&key.public, &key.common, &rec.digest, &s, &key.common.interp)
                                .is_ok_and(|v| v.accepted)
                        });
                    if ok {
                        (Verdict::Accept, Some(rec.source_info.clone()))
                    } else {
                        (Verdict::Reject, None)
                    }
                }
            };
            let o = Observation {
                seq,
                bfid,
                verdict,
                region: region.clone().unwrap_or_else(|| "-".into()),
                ts,
            };
            let response = match source {
                Some(s) => format!("OK ACCEPT {}", quote(&s)),
                None => format!("OK {verdict}"),
            };
            return Ok(Prepared { log_line: o.log_line(), change: Change::Observe(o), response });
        }
        Request::Event { bfid, stage, region, ts, .. } => {
            let bfid = canonical_bfid(bfid)?;
            let rec = st
                .identities
                .get(&bfid)
                .ok_or_else(|| PlatformError::new("unknown-bfid", bfid.clone()))?;
            if let Some(last) = st.events.get(&bfid).and_then(|v| v.last()) {
                if *ts < last.ts {
                    return Err(PlatformError::new(
                        "out-of-order",
                        format!("ts {ts} precedes the last event at {}", last.ts),
                    ));
                }
            }
            check_signature(req, &st.subjects[&rec.subject_id])?;
            let e = TraceEvent { seq, bfid, stage: *stage, region: region.clone(), ts: *ts };
            (Change::Event(e), format!("OK EVENT {seq}"))
        }
        Request::Trace { .. } | Request::Scan { .. } => {
            return Err(PlatformError::bad_request("not a mutation"));
        }
    };
    Ok(Prepared { log_line: req.to_frame(), change, response })
}
