use bfid_core::digest::Sha256Digest;
use bfid_core::netapps::{
    check_dynamic_password, gen_dynamic_password, host_interface_profile, make_interface_id,
    validate_source_address, Ipv6PlusAddress, Layout, LoginContext,
};
use bfid_core::platform::{frames, VerifyOutcome};

use crate::args::{DynpassCommand, IidArgs, Ipv6Command, LoginArgs, PackArgs, ParseArgs, ValidateArgs};
use crate::crypto::{load_key, private_parts, public_parts, rng};
use crate::remote::{client_error, connect};
use crate::{failed, CliError, CliResult};

fn layout(s: &str) -> Result<Layout, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("--layout: {e}")))
}

/// Accepts `<addr>` with `--layout`, or `<addr> layout=r,s` in one argument.
fn address(text: &str, default_layout: &str) -> Result<Ipv6PlusAddress, CliError> {
    let full = if text.contains("layout=") { text.to_string() } else { format!("{text} layout={default_layout}") };
    full.parse().map_err(|e| CliError::Usage(format!("{e}")))
}

fn print_fields(a: &Ipv6PlusAddress) -> Result<(), CliError> {
    println!("{a}");
    println!("ipv6 {}", a.to_ipv6().map_err(failed("address"))?);
    println!("nation {}", a.nation);
    println!("routing {:#x}", a.routing);
    println!("subnet {:#x}", a.subnet);
    println!("interface {:020x}", a.interface_id);
    println!("bfid {}", a.interface_bfid());
    Ok(())
}

pub fn ipv6plus(cmd: Ipv6Command) -> CliResult {
    match cmd {
        Ipv6Command::Pack(a) => pack(a),
        Ipv6Command::Parse(a) => parse(a),
        Ipv6Command::Validate(a) => validate(a),
        Ipv6Command::Iid(a) => iid(a),
    }
}

fn pack(a: PackArgs) -> CliResult {
    let iid = u128::from_str_radix(&a.iid, 16).map_err(|_| CliError::Usage("--iid is not hex".into()))?;
    let addr = Ipv6PlusAddress::new(a.nation, a.routing, a.subnet, iid, layout(&a.layout)?)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{addr}");
    Ok(())
}

fn parse(a: ParseArgs) -> CliResult {
    print_fields(&address(&a.address, &a.layout)?)
}

fn validate(a: ValidateArgs) -> CliResult {
    let addr = address(&a.address, &a.layout)?;
    let mut c = connect(&a.platform)?;
    let v = validate_source_address(&addr, &mut c, a.region.as_deref()).map_err(client_error)?;
    match &v {
        VerifyOutcome::Accept { source_info } => println!("ACCEPT {source_info:?}"),
        VerifyOutcome::Reject => println!("REJECT"),
        VerifyOutcome::Unknown => println!("UNKNOWN"),
    }
    if a.strict && !matches!(v, VerifyOutcome::Accept { .. }) {
        return Err(CliError::Negative("source address not accepted".into()));
    }
    Ok(())
}

fn iid(a: IidArgs) -> CliResult {
    let kf = load_key(&a.key)?;
    let (sk, common) = private_parts(&kf)?;
    let l = layout(&a.layout)?;
    let host = host_interface_profile(&a.subject, &a.domain, &a.eui64, a.nation, a.routing, a.subnet)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut rng = rng(&a.seed);
    let hash = Sha256Digest { bits: common.n };
    let (iid, conf) = make_interface_id(sk, common, &host, &hash, &common.interp, &mut rng)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let addr = Ipv6PlusAddress::new(a.nation, a.routing, a.subnet, iid, l).map_err(|e| CliError::Usage(e.to_string()))?;
    print_fields(&addr)?;
    println!("u {:x}", conf.escrow.u);
    if a.register {
        let req = frames::register_id(&conf, &a.subject, sk, common, &mut rng).map_err(failed("sign request"))?;
        let mut c = connect(&a.platform)?;
        let (fields, _) = c.send(&req).map_err(client_error)?;
        println!("{}", fields.join(" "));
    }
    Ok(())
}

fn login(l: &LoginArgs) -> LoginContext {
    LoginContext::new(&l.user, &l.date, &l.time, &l.machine)
}

pub fn dynpass(cmd: DynpassCommand) -> CliResult {
    match cmd {
        DynpassCommand::Gen(a) => {
            let kf = load_key(&a.key)?;
            let (sk, common) = private_parts(&kf)?;
            let hash = Sha256Digest { bits: common.n };
            let pw = gen_dynamic_password(sk, common, &login(&a.login), &hash, &common.interp, &mut rng(&a.seed))
                .map_err(failed("dynpass"))?;
            println!("{pw}");
            Ok(())
        }
        DynpassCommand::Check(a) => {
            let kf = load_key(&a.key)?;
            let (pk, common) = public_parts(&kf)?;
            let hash = Sha256Digest { bits: common.n };
            let ok = check_dynamic_password(pk, common, &login(&a.login), &a.password, &hash, &common.interp)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            println!("{}", if ok { "ACCEPT" } else { "REJECT" });
            if a.strict && !ok {
                return Err(CliError::Negative("password rejected".into()));
            }
            Ok(())
        }
    }
}
