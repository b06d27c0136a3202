use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

/// Everything needed to reproduce a result, wrapped around it.
#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub compressor: String,
    pub seed: u64,
    pub budgets: BTreeMap<String, Value>,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// `# key=value` lines for the text and CSV formats.
    pub fn header(&self) -> String {
        let mut s = format!(
            "# {} {} {} compressor={} seed={}",
            self.tool, self.version, self.command, self.compressor, self.seed
        );
        for (k, v) in &self.budgets {
            s.push_str(&format!(" {k}={v}"));
        }
        s.push('\n');
        s
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
