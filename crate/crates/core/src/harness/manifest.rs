//! Run manifests: enough to repeat a run bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{DgfcError, Result};

/// SHA-256 over the input bytes followed by the config bytes, each
/// prefixed with its length.
pub fn digest(input: &[u8], config: &[u8]) -> String {
    let mut h = Sha256::new();
    for part in [input, config] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub input_digest: String,
    /// Wall-clock time of the run; not part of the digest.
    pub created: String,
    pub config: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, input: &[u8], config: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            input_digest: digest(input, config.as_bytes()),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config: config.to_string(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "input_digest = {}", self.input_digest);
        let _ = writeln!(s, "created = {}", self.created);
        let _ = writeln!(s, "--- config");
        s.push_str(&self.config);
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (head, config) = text
            .split_once("--- config\n")
            .ok_or_else(|| DgfcError::Validation("manifest has no config section".into()))?;
        let field = |key: &str| -> Result<String> {
            head.lines()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
                .map(str::to_string)
                .ok_or_else(|| DgfcError::Validation(format!("manifest lacks `{key}`")))
        };
        Ok(Self {
            command: field("command")?,
            version: field("version")?,
            seed: field("seed")?
                .parse()
                .map_err(|_| DgfcError::Validation("manifest seed is not an integer".into()))?,
            input_digest: field("input_digest")?,
            created: field("created")?,
            config: config.to_string(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
