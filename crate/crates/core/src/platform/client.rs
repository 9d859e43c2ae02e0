use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use thiserror::Error;

use super::protocol::tokenize;
use super::{Platform, PlatformError, Request};

#[derive(Debug, Error)]
pub enum ClientError {
    /// The platform could not be reached or the connection broke.
    #[error("transport: {0}")]
    Transport(#[from] io::Error),
    /// The platform answered `ERR`.
    #[error("platform refused: {0}")]
    Refused(PlatformError),
    #[error("unexpected response: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyOutcome {
    Accept { source_info: String },
    Reject,
    Unknown,
}

/// Anything that answers identity queries.
pub trait VerificationService {
    fn verify(
        &mut self,
        bfid: &str,
        digest: Option<&str>,
        region: Option<&str>,
        ts: Option<u64>,
    ) -> Result<VerifyOutcome, ClientError>;
}

fn verify_request(bfid: &str, digest: Option<&str>, region: Option<&str>, ts: Option<u64>) -> Request {
    Request::Verify {
        bfid: bfid.into(),
        digest: digest.map(Into::into),
        region: region.map(Into::into),
        ts,
    }
}

/// Parses a single response line; `ERR` becomes [`ClientError::Refused`].
pub fn parse_response(line: &str) -> Result<Vec<String>, ClientError> {
    if let Some(rest) = line.strip_prefix("ERR ") {
        let (code, msg) = rest.split_once(' ').unwrap_or((rest, ""));
        // Codes are static in PlatformError; keep unknown ones generic.
        let code = KNOWN_CODES.iter().find(|c| **c == code).copied().unwrap_or("error");
        return Err(ClientError::Refused(PlatformError::new(code, msg)));
    }
    let t = tokenize(line).map_err(|e| ClientError::Protocol(e.to_string()))?;
    if t.first().map(String::as_str) != Some("OK") {
        return Err(ClientError::Protocol(line.to_string()));
    }
    Ok(t[1..].to_vec())
}

const KNOWN_CODES: &[&str] = &[
    "bad-request",
    "unknown-command",
    "duplicate-subject",
    "malformed-key",
    "bad-key",
    "bad-signature",
    "unknown-subject",
    "malformed-bfid",
    "duplicate-bfid",
    "bad-identity",
    "unknown-bfid",
    "out-of-order",
    "io",
    "signing",
];

fn outcome(fields: &[String]) -> Result<VerifyOutcome, ClientError> {
    match fields {
        [v, s] if v == "ACCEPT" => Ok(VerifyOutcome::Accept { source_info: s.clone() }),
        [v] if v == "REJECT" => Ok(VerifyOutcome::Reject),
        [v] if v == "UNKNOWN" => Ok(VerifyOutcome::Unknown),
        _ => Err(ClientError::Protocol(fields.join(" "))),
    }
}

/// A TCP connection to a platform.
pub struct PlatformClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl PlatformClient {
    pub fn connect(addr: impl ToSocketAddrs, timeout: Option<Duration>) -> io::Result<Self> {
        let mut last = io::Error::new(io::ErrorKind::AddrNotAvailable, "no address");
        for a in addr.to_socket_addrs()? {
            let conn = match timeout {
                Some(t) => TcpStream::connect_timeout(&a, t),
                None => TcpStream::connect(a),
            };
            match conn {
                Ok(s) => {
                    s.set_read_timeout(timeout)?;
                    s.set_write_timeout(timeout)?;
                    let writer = s.try_clone()?;
                    return Ok(PlatformClient { reader: BufReader::new(s), writer });
                }
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    /// Sends a raw frame and returns the response lines.
    pub fn request_raw(&mut self, frame: &str) -> io::Result<Vec<String>> {
        self.writer.write_all(frame.trim_end().as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        let first = self.read_line()?;
        let mut lines = vec![first.clone()];
        let verb = frame.split(' ').next().unwrap_or("");
        if matches!(verb, "TRACE" | "SCAN") {
            if let Some(count) = first.strip_prefix("OK ").and_then(|c| c.parse::<usize>().ok()) {
                for _ in 0..count {
                    lines.push(self.read_line()?);
                }
            }
        }
        Ok(lines)
    }

    fn read_line(&mut self) -> io::Result<String> {
        let mut s = String::new();
        if self.reader.read_line(&mut s)? == 0 {
            return Err(io::Error::new(io::ErrorKind::UnexpectedEof, "platform closed the connection"));
        }
        Ok(s.trim_end_matches(['\r', '\n']).to_string())
    }

    /// Sends a request; `ERR` responses become [`ClientError::Refused`].
    /// Returns the fields of the `OK` line and any following lines.
    pub fn send(&mut self, req: &Request) -> Result<(Vec<String>, Vec<String>), ClientError> {
        let mut lines = self.request_raw(&req.to_frame())?;
        let rest = lines.split_off(1);
        Ok((parse_response(&lines[0])?, rest))
    }
}

impl VerificationService for PlatformClient {
    fn verify(
        &mut self,
        bfid: &str,
        digest: Option<&str>,
        region: Option<&str>,
        ts: Option<u64>,
    ) -> Result<VerifyOutcome, ClientError> {
        let (fields, _) = self.send(&verify_request(bfid, digest, region, ts))?;
        outcome(&fields)
    }
}

impl VerificationService for &Platform {
    fn verify(
        &mut self,
        bfid: &str,
        digest: Option<&str>,
        region: Option<&str>,
        ts: Option<u64>,
    ) -> Result<VerifyOutcome, ClientError> {
        let resp = self.handle(&verify_request(bfid, digest, region, ts)).map_err(ClientError::Refused)?;
        outcome(&parse_response(&resp)?)
    }
}
