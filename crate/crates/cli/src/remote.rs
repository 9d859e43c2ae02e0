use std::io::Write;
use std::net::TcpListener;
use std::sync::Arc;
use std::time::Duration;

use bfid_core::codec::confect_bfid;
use bfid_core::digest::Sha256Digest;
use bfid_core::platform::client::ClientError;
use bfid_core::platform::{frames, server, Platform, PlatformClient, PlatformConfig, Request, Stage};

use crate::args::{
    EventArgs, PlatformArg, QueryArgs, RegisterIdArgs, RegisterSubjectArgs, ScanArgs, ServeArgs, TraceArgs,
};
use crate::crypto::{load_key, object_profile, parse_mode, private_parts, public_text, rng};
use crate::{failed, CliError, CliResult};

pub fn connect(p: &PlatformArg) -> Result<PlatformClient, CliError> {
    PlatformClient::connect(p.platform.as_str(), Some(Duration::from_secs(p.timeout.max(1))))
        .map_err(|e| CliError::Transport(format!("{}: {e}", p.platform)))
}

pub fn client_error(e: ClientError) -> CliError {
    match e {
        ClientError::Transport(e) => CliError::Transport(e.to_string()),
        ClientError::Refused(e) if matches!(e.code, "malformed-bfid" | "bad-request") => {
            CliError::Usage(format!("platform refused: {} {}", e.code, e.message))
        }
        ClientError::Refused(e) => CliError::Failed(format!("platform refused: {} {}", e.code, e.message)),
        ClientError::Protocol(m) => CliError::Failed(format!("unexpected response: {m}")),
    }
}

/// Sends a request and prints the `OK` fields and any following lines.
fn send_and_print(p: &PlatformArg, req: &Request) -> CliResult {
    let mut c = connect(p)?;
    let (fields, rest) = c.send(req).map_err(client_error)?;
    println!("{}", fields.join(" "));
    for l in rest {
        println!("{l}");
    }
    Ok(())
}

pub fn serve(a: ServeArgs) -> CliResult {
    let config = PlatformConfig { burst_threshold: a.threshold, ..PlatformConfig::default() };
    let platform = match &a.log {
        Some(path) => Platform::open(path, config).map_err(failed(&path.display().to_string()))?,
        None => Platform::in_memory(config),
    };
    let listener = TcpListener::bind(&a.listen).map_err(failed(&a.listen))?;
    let addr = listener.local_addr().map_err(failed("listen"))?;
    println!("listening on {addr} ({} log entries replayed)", platform.seq());
    let _ = std::io::stdout().flush();
    server::serve(listener, Arc::new(platform)).map_err(failed("serve"))
}

pub fn register_subject(a: RegisterSubjectArgs) -> CliResult {
    let kf = load_key(&a.key)?;
    let (sk, common) = private_parts(&kf)?;
    let req = frames::register_subject(&a.id, &public_text(&kf), sk, common, &mut rng(&a.seed))
        .map_err(failed("sign request"))?;
    send_and_print(&a.platform, &req)
}

pub fn register_id(a: RegisterIdArgs) -> CliResult {
    let kf = load_key(&a.key)?;
    let (sk, common) = private_parts(&kf)?;
    let profile = object_profile(&a.subject, &a.object)?;
    let mode = parse_mode(&a.mode)?;
    let mut rng = rng(&a.seed);
    let hash = Sha256Digest { bits: common.n };
    let conf = confect_bfid(sk, common, &profile, &hash, mode, &common.interp, &mut rng).map_err(failed("confect"))?;
    let req = frames::register_id(&conf, &a.subject, sk, common, &mut rng).map_err(failed("sign request"))?;
    send_and_print(&a.platform, &req)?;
    println!("digest {}", conf.escrow.digest_hex());
    Ok(())
}

pub fn query(a: QueryArgs) -> CliResult {
    let req = Request::Verify { bfid: a.bfid.clone(), digest: a.digest, region: a.region, ts: a.ts };
    let mut c = connect(&a.platform)?;
    let (fields, _) = c.send(&req).map_err(client_error)?;
    match fields.as_slice() {
        [v, src] if v == "ACCEPT" => println!("ACCEPT {src}"),
        [v] => println!("{v}"),
        other => return Err(CliError::Failed(format!("unexpected response {other:?}"))),
    }
    if a.strict && fields[0] != "ACCEPT" {
        return Err(CliError::Negative(format!("{} not accepted", a.bfid)));
    }
    Ok(())
}

pub fn trace(a: TraceArgs) -> CliResult {
    send_and_print(&a.platform, &Request::Trace { bfid: a.bfid })
}

pub fn event(a: EventArgs) -> CliResult {
    let stage: Stage = a.stage.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
    let kf = load_key(&a.key)?;
    let (sk, common) = private_parts(&kf)?;
    let req = frames::event(&a.bfid, stage, &a.region, a.ts, sk, common, &mut rng(&a.seed))
        .map_err(failed("sign request"))?;
    send_and_print(&a.platform, &req)
}

pub fn scan(a: ScanArgs) -> CliResult {
    send_and_print(&a.platform, &Request::Scan { window: a.window })
}
