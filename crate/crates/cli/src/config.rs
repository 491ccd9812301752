//! Experiment configuration: flag values, flat config files, and the
//! canonical hash embedded in every output.
//!
//! Config files are flat `key = value` text; keys mirror the long flags.
//! Unknown keys are rejected. Command-line flags override file entries.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Keys accepted in config files and their flag counterparts.
pub const KNOWN_KEYS: &[&str] = &[
    "map", "radius", "target", "method", "homotopy", "tol", "grid", "seed", "out", "l", "order",
    "n", "diag", "kmax", "delta0", "net-radius", "samples", "control", "l-range", "stages",
];

/// A flat, ordered key-value configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

impl FlatConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are
    /// rejected.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected key = value", lineno + 1));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key '{key}'", lineno + 1));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Loads and parses a file.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// Inserts a value (used when folding flags over file entries).
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    /// Looks up a value.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// The canonical form: sorted `key=value` lines.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Hex SHA-256 prefix of the canonical form; embedded in every output.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    /// Parsed u64 seed (default 0).
    pub fn seed(&self) -> Result<u64, String> {
        match self.get("seed") {
            None => Ok(0),
            Some(s) => s.parse().map_err(|e| format!("bad seed '{s}': {e}")),
        }
    }

    /// Parses a comma-separated list of integers (for `n`, `l-range`).
    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>, String> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        // allow "a..b" ranges alongside comma lists
        if let Some((a, b)) = raw.split_once("..") {
            let a: usize = a.trim().parse().map_err(|e| format!("bad range '{raw}': {e}"))?;
            let b: usize = b.trim().parse().map_err(|e| format!("bad range '{raw}': {e}"))?;
            if b < a {
                return Err(format!("empty range '{raw}'"));
            }
            return Ok(Some((a..=b).collect()));
        }
        let list = raw
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("bad list '{raw}': {e}"))?;
        Ok(Some(list))
    }

    /// Parses a comma-separated list of floats (for `diag`, `target`).
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, String> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        let list = raw
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("bad list '{raw}': {e}"))?;
        Ok(Some(list))
    }

    /// Parses an f64.
    pub fn f64_value(&self, key: &str) -> Result<Option<f64>, String> {
        self.get(key)
            .map(|s| s.parse().map_err(|e| format!("bad {key} '{s}': {e}")))
            .transpose()
    }

    /// Parses a usize.
    pub fn usize_value(&self, key: &str) -> Result<Option<usize>, String> {
        self.get(key)
            .map(|s| s.parse().map_err(|e| format!("bad {key} '{s}': {e}")))
            .transpose()
    }
}

/// Resolves the output directory: `--out`, then the environment variable,
/// then the current directory.
pub fn output_dir(config: &FlatConfig) -> std::path::PathBuf {
    if let Some(out) = config.get("out") {
        return out.into();
    }
    if let Ok(dir) = std::env::var("BOTTDEG_OUT_DIR") {
        if !dir.is_empty() {
            return dir.into();
        }
    }
    ".".into()
}

/// Writes a file atomically: to a sibling temp path, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
