//! `bfid`: keys, hashes, signatures, identities, the platform daemon and
//! its clients.
//!
//! Exit codes: 0 success or a definitive verdict, 1 failure, 2 usage error,
//! 3 negative verdict under `--strict`, 4 platform unreachable.

mod args;
mod crypto;
mod net;
mod remote;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
    Negative(String),
    Transport(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Negative(_) => 3,
            CliError::Transport(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) | CliError::Negative(m) | CliError::Transport(m) => {
                f.write_str(m)
            }
        }
    }
}

pub type CliResult = Result<(), CliError>;

/// Wraps any displayable error as a plain failure.
pub fn failed<E: fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Failed(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(a) => crypto::keygen(a),
        Command::HashInit(a) => crypto::hash_init(a),
        Command::Hash(a) => crypto::hash(a),
        Command::Sign(a) => crypto::sign(a),
        Command::Verify(a) => crypto::verify(a),
        Command::Bfid(a) => crypto::bfid(a),
        Command::Probe(a) => crypto::probe(a),
        Command::Serve(a) => remote::serve(a),
        Command::RegisterSubject(a) => remote::register_subject(a),
        Command::RegisterId(a) => remote::register_id(a),
        Command::Query(a) => remote::query(a),
        Command::Trace(a) => remote::trace(a),
        Command::Event(a) => remote::event(a),
        Command::Scan(a) => remote::scan(a),
        Command::Ipv6plus(a) => net::ipv6plus(a),
        Command::Dynpass(a) => net::dynpass(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bfid: {e}");
            ExitCode::from(e.code())
        }
    }
}
