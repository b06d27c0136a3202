//! Size measurement through an external compressor process.
//!
//! The command receives the raw bytes on stdin and must write the
//! compressed bytes to stdout and exit with status 0.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use crate::complexity::{ComplexityEstimate, Mode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalCommand {
    pub argv: Vec<String>,
    pub timeout_ms: u64,
    /// Run every measurement twice and fail if the sizes differ.
    pub audit: bool,
}

impl ExternalCommand {
    pub fn new<S: Into<String>>(argv: impl IntoIterator<Item = S>) -> Self {
        ExternalCommand {
            argv: argv.into_iter().map(Into::into).collect(),
            timeout_ms: 60_000,
            audit: false,
        }
    }

    /// Splits a command line on whitespace. No quoting is supported.
    pub fn parse(command_line: &str) -> Result<Self> {
        let cmd = Self::new(command_line.split_whitespace());
        if cmd.argv.is_empty() {
            return Err(Error::InvalidArgument("empty compressor command".into()));
        }
        Ok(cmd)
    }

    pub fn with_timeout(mut self, millis: u64) -> Self {
        self.timeout_ms = millis;
        self
    }

    pub fn with_audit(mut self, audit: bool) -> Self {
        self.audit = audit;
        self
    }

    /// The compressor id: the argv joined by single spaces.
    pub fn id(&self) -> String {
        self.argv.join(" ")
    }

    /// Runs the command once and returns the compressed length in bytes.
    pub fn run(&self, input: &[u8]) -> Result<usize> {
        let command = self.id();
        let (program, args) = self
            .argv
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty compressor command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| Error::SpawnFailed {
                command: command.clone(),
                source,
            })?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let data = input.to_vec();
        let writer = thread::spawn(move || {
            // A compressor may exit early; a broken pipe then shows up as a
            // nonzero exit status, which is reported below.
            let _ = stdin.write_all(&data);
        });
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut n = 0usize;
            let mut buf = [0u8; 1 << 16];
            loop {
                match stdout.read(&mut buf) {
                    Ok(0) | Err(_) => return n,
                    Ok(k) => n += k,
                }
            }
        });
        let mut stderr = child.stderr.take().expect("piped stderr");
        let err_reader = thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });

        let status = match child.wait_timeout(Duration::from_millis(self.timeout_ms))? {
            Some(status) => status,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::Timeout {
                    command,
                    millis: self.timeout_ms,
                });
            }
        };
        let _ = writer.join();
        let produced = reader.join().unwrap_or(0);
        let diagnostics = err_reader.join().unwrap_or_default();

        if !status.success() {
            return Err(Error::ProcessFailed {
                command,
                diagnostics: format!("{status}; stderr: {}", diagnostics.trim()),
            });
        }
        if produced == 0 && !input.is_empty() {
            return Err(Error::ProcessFailed {
                command,
                diagnostics: "empty output on nonempty input".into(),
            });
        }
        Ok(produced)
    }
}

/// Compressed size of `bytes` under `cmd`, in bits.
pub fn external_compressed_size(bytes: &[u8], cmd: &ExternalCommand) -> Result<ComplexityEstimate> {
    let first = cmd.run(bytes)?;
    if cmd.audit {
        let second = cmd.run(bytes)?;
        if second != first {
            return Err(Error::Nondeterministic {
                command: cmd.id(),
                first,
                second,
            });
        }
    }
    Ok(ComplexityEstimate::new(
        8.0 * first as f64,
        cmd.id(),
        Mode::Unconditional,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_measures_input_length() {
        let cmd = ExternalCommand::new(["cat"]);
        let e = external_compressed_size(b"hello", &cmd).unwrap();
        assert_eq!(e.bits, 40.0);
        assert_eq!(e.source, "cat");
    }

    #[test]
    fn missing_executable() {
        let cmd = ExternalCommand::new(["/nonexistent/compressor-xyz"]);
        let err = external_compressed_size(b"x", &cmd).unwrap_err();
        assert!(err.to_string().starts_with("spawn failed"), "{err}");
    }

    #[test]
    fn nonzero_exit_carries_diagnostics() {
        let cmd = ExternalCommand::new(["sh", "-c", "echo boom >&2; exit 3"]);
        let err = cmd.run(b"x").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("boom") && msg.contains('3'), "{msg}");
    }

    #[test]
    fn empty_output_on_nonempty_input() {
        let cmd = ExternalCommand::new(["sh", "-c", "cat >/dev/null"]);
        assert!(matches!(cmd.run(b"abc"), Err(Error::ProcessFailed { .. })));
        assert_eq!(cmd.run(b"").unwrap(), 0);
    }

    #[test]
    fn timeout() {
        let cmd = ExternalCommand::new(["sleep", "5"]).with_timeout(100);
        assert!(matches!(cmd.run(b""), Err(Error::Timeout { .. })));
    }

    #[test]
    fn audit_catches_nondeterminism() {
        // Output length depends on the clock's nanoseconds.
        let cmd = ExternalCommand::new([
            "sh",
            "-c",
            "cat >/dev/null; head -c $(( $(date +%N) % 1000 + 1 )) /dev/zero",
        ])
        .with_audit(true);
        let mut saw = false;
        for _ in 0..5 {
            if let Err(Error::Nondeterministic { .. }) = external_compressed_size(b"abc", &cmd) {
                saw = true;
                break;
            }
        }
        assert!(saw);
        let ok = ExternalCommand::new(["cat"]).with_audit(true);
        assert!(external_compressed_size(b"abc", &ok).is_ok());
    }

    #[test]
    fn parse_splits_whitespace() {
        let c = ExternalCommand::parse("  xz  -9 -c ").unwrap();
        assert_eq!(c.argv, ["xz", "-9", "-c"]);
        assert_eq!(c.id(), "xz -9 -c");
        assert!(ExternalCommand::parse("   ").is_err());
    }
}
