use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bfid", version, about = "Lightweight asymmetric identities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a signing key pair.
    Keygen(KeygenArgs),
    /// Generate a Juna hash initial value.
    HashInit(HashInitArgs),
    /// Hash a file.
    Hash(HashArgs),
    /// Sign a file.
    Sign(SignArgs),
    /// Verify a file signature.
    Verify(VerifyArgs),
    /// Confect or check identities offline.
    #[command(subcommand)]
    Bfid(BfidCommand),
    /// Run keygen, sign and verify under each formula reading and report.
    Probe(ProbeArgs),
    /// Run the verification platform.
    Serve(ServeArgs),
    /// Register a subject's public key with the platform.
    RegisterSubject(RegisterSubjectArgs),
    /// Register an identity with the platform.
    RegisterId(RegisterIdArgs),
    /// Ask the platform about an identity.
    Query(QueryArgs),
    /// List an identity's trace events.
    Trace(TraceArgs),
    /// Record a trace event.
    Event(EventArgs),
    /// Run the fraud scan.
    Scan(ScanArgs),
    /// IPv6+ addresses.
    #[command(subcommand)]
    Ipv6plus(Ipv6Command),
    /// One-time login passwords.
    #[command(subcommand)]
    Dynpass(DynpassCommand),
}

#[derive(Args, Clone)]
pub struct SeedArg {
    /// Seed for reproducible output; random when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Clone)]
pub struct PlatformArg {
    /// Platform address.
    #[arg(long, default_value = "127.0.0.1:7070")]
    pub platform: String,
    /// Connect and read timeout in seconds.
    #[arg(long, default_value_t = 10)]
    pub timeout: u64,
}

#[derive(Args)]
pub struct KeygenArgs {
    /// toy24, toy32 or paper.
    #[arg(long, default_value = "paper")]
    pub profile: String,
    /// Modulus bits for the full-size profile.
    #[arg(long, default_value_t = 80)]
    pub m: u64,
    /// Digest bits for the full-size profile.
    #[arg(long, default_value_t = 80)]
    pub n: usize,
    /// Formula reading, e.g. `reconciled` or `printed,u-exp=mul`.
    #[arg(long, default_value = "reconciled")]
    pub interp: String,
    /// Directory for public.key and private.key.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Print the constraint audit.
    #[arg(long)]
    pub audit: bool,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct HashInitArgs {
    #[arg(long, default_value_t = 80)]
    pub m: u64,
    #[arg(long, default_value_t = 80)]
    pub n: usize,
    /// Largest coprime-sequence value.
    #[arg(long, default_value_t = 1021)]
    pub prime_bound: u64,
    /// Lever set size.
    #[arg(long, default_value_t = 80)]
    pub n_tilde: u64,
    /// Allow sizes outside the published ranges.
    #[arg(long)]
    pub toy: bool,
    #[arg(long, default_value = "iv.txt")]
    pub out: PathBuf,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct HashArgs {
    pub file: PathBuf,
    /// Juna initial value; SHA-256 when omitted.
    #[arg(long)]
    pub iv: Option<PathBuf>,
    /// Output bits for SHA-256.
    #[arg(long, default_value_t = 256)]
    pub bits: usize,
}

#[derive(Args)]
pub struct SignArgs {
    /// Private key file.
    #[arg(long)]
    pub key: PathBuf,
    /// File to sign.
    pub file: PathBuf,
    /// Signature output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Juna initial value for the digest; SHA-256 when omitted.
    #[arg(long)]
    pub iv: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Public (or private) key file.
    #[arg(long)]
    pub key: PathBuf,
    pub file: PathBuf,
    #[arg(long)]
    pub sig: PathBuf,
    #[arg(long)]
    pub iv: Option<PathBuf>,
    /// Exit 3 on rejection.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Clone)]
pub struct ObjectArgs {
    /// merchandise, document, program, resident, host-interface, login, passport.
    #[arg(long, default_value = "merchandise")]
    pub kind: String,
    /// Attribute `name=value`; repeatable, order matters.
    #[arg(long = "attr")]
    pub attrs: Vec<String>,
}

#[derive(Subcommand)]
pub enum BfidCommand {
    /// Sign an object profile into an identity.
    Confect(ConfectArgs),
    /// Check an identity against an object profile.
    Check(CheckArgs),
}

#[derive(Args)]
pub struct ConfectArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// Issuer name bound into the profile.
    #[arg(long)]
    pub subject: String,
    #[command(flatten)]
    pub object: ObjectArgs,
    /// escrow or full.
    #[arg(long, default_value = "escrow")]
    pub mode: String,
    #[arg(long)]
    pub iv: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub subject: String,
    #[command(flatten)]
    pub object: ObjectArgs,
    pub bfid: String,
    /// Escrowed U (hex) for escrow-mode identities.
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub iv: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args)]
pub struct ProbeArgs {
    /// Comma-separated profiles.
    #[arg(long, default_value = "toy24,toy32")]
    pub profiles: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Report output (TSV); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7070")]
    pub listen: String,
    /// Append-only log; in memory when omitted.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Observations per fraud burst.
    #[arg(long, default_value_t = 5)]
    pub threshold: usize,
}

#[derive(Args)]
pub struct RegisterSubjectArgs {
    /// Subject name.
    #[arg(long)]
    pub id: String,
    /// Private key file; its public part is registered.
    #[arg(long)]
    pub key: PathBuf,
    #[command(flatten)]
    pub platform: PlatformArg,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct RegisterIdArgs {
    /// Registered subject name; also the issuer bound into the profile.
    #[arg(long)]
    pub subject: String,
    #[arg(long)]
    pub key: PathBuf,
    #[command(flatten)]
    pub object: ObjectArgs,
    #[arg(long, default_value = "escrow")]
    pub mode: String,
    #[command(flatten)]
    pub platform: PlatformArg,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct QueryArgs {
    pub bfid: String,
    /// Digest of the profile the inquirer holds (hex).
    #[arg(long)]
    pub digest: Option<String>,
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub ts: Option<u64>,
    /// Exit 3 unless accepted.
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub platform: PlatformArg,
}

#[derive(Args)]
pub struct TraceArgs {
    pub bfid: String,
    #[command(flatten)]
    pub platform: PlatformArg,
}

#[derive(Args)]
pub struct EventArgs {
    pub bfid: String,
    /// warehouse-out, delivery, passage or marketing.
    #[arg(long)]
    pub stage: String,
    #[arg(long)]
    pub region: String,
    #[arg(long)]
    pub ts: u64,
    /// The issuing subject's private key.
    #[arg(long)]
    pub key: PathBuf,
    #[command(flatten)]
    pub platform: PlatformArg,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 86_400)]
    pub window: u64,
    #[command(flatten)]
    pub platform: PlatformArg,
}

#[derive(Subcommand)]
pub enum Ipv6Command {
    /// Pack fields into an address.
    Pack(PackArgs),
    /// Split an address into fields.
    Parse(ParseArgs),
    /// Ask the platform about an address's interface id.
    Validate(ValidateArgs),
    /// Make an interface id for a host and print its address.
    Iid(IidArgs),
}

#[derive(Args)]
pub struct PackArgs {
    #[arg(long)]
    pub nation: u8,
    #[arg(long)]
    pub routing: u32,
    #[arg(long)]
    pub subnet: u16,
    /// 80-bit interface id, hex.
    #[arg(long)]
    pub iid: String,
    /// `<routing bits>,<subnet bits>`.
    #[arg(long, default_value = "32,8")]
    pub layout: String,
}

#[derive(Args)]
pub struct ParseArgs {
    /// 32 hex digits or colon form.
    pub address: String,
    #[arg(long, default_value = "32,8")]
    pub layout: String,
}

#[derive(Args)]
pub struct ValidateArgs {
    pub address: String,
    #[arg(long, default_value = "32,8")]
    pub layout: String,
    #[arg(long)]
    pub region: Option<String>,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub platform: PlatformArg,
}

#[derive(Args)]
pub struct IidArgs {
    /// Administration's private key (80-bit modulus).
    #[arg(long)]
    pub key: PathBuf,
    /// Administration name.
    #[arg(long)]
    pub subject: String,
    #[arg(long)]
    pub domain: String,
    #[arg(long)]
    pub eui64: String,
    #[arg(long)]
    pub nation: u8,
    #[arg(long)]
    pub routing: u32,
    #[arg(long)]
    pub subnet: u16,
    #[arg(long, default_value = "32,8")]
    pub layout: String,
    /// Also register the interface id with the platform.
    #[arg(long)]
    pub register: bool,
    #[command(flatten)]
    pub platform: PlatformArg,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Subcommand)]
pub enum DynpassCommand {
    /// Generate a password for a login.
    Gen(DynpassGenArgs),
    /// Check a password against a login.
    Check(DynpassCheckArgs),
}

#[derive(Args, Clone)]
pub struct LoginArgs {
    #[arg(long)]
    pub user: String,
    #[arg(long)]
    pub date: String,
    #[arg(long)]
    pub time: String,
    #[arg(long)]
    pub machine: String,
}

#[derive(Args)]
pub struct DynpassGenArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[command(flatten)]
    pub login: LoginArgs,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Args)]
pub struct DynpassCheckArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[command(flatten)]
    pub login: LoginArgs,
    pub password: String,
    #[arg(long)]
    pub strict: bool,
}
