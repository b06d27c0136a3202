mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// A usage or input problem the user can fix: exit code 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.chain().find_map(|e| e.downcast_ref::<mid_core::Error>()) {
        Some(e) => core_code(e),
        None => 2,
    }
}

fn core_code(e: &mid_core::Error) -> u8 {
    use mid_core::Error as E;
    match e {
        E::Item { source, .. } => core_code(source),
        E::EnumerationBudget { .. } => 4,
        E::InvalidArgument(_)
        | E::MalformedEncoding(_)
        | E::TrailingBytes(_)
        | E::NotBits(_)
        | E::CacheFormat { .. }
        | E::SpawnFailed { .. }
        | E::Io(_)
        | E::Json(_)
        | E::Csv(_) => 2,
        _ => 3,
    }
}

/// The error chain, skipping causes a parent message already includes.
fn message(err: &anyhow::Error) -> String {
    let mut s = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !s.contains(&text) {
            if !s.is_empty() {
                s.push_str(": ");
            }
            s.push_str(&text);
        }
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("mid: {}", message(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}
