//! Provenance headers, number formatting and atomic file writes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL: &str = "bykov-atlas";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Command-specific settings that shape the output, such as radii and tolerances.
    pub settings: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str, config_bytes: &[u8], seed: u64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(config_bytes)),
            seed,
            settings: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.settings.insert(key.to_string(), value.to_string());
        self
    }

    fn comment_lines(&self, prefix: &str) -> String {
        let mut s = format!(
            "{prefix}{} {}\n{prefix}command {}\n{prefix}config-sha256 {}\n{prefix}seed {}\n",
            self.tool, self.version, self.command, self.config_sha256, self.seed
        );
        for (k, v) in &self.settings {
            s.push_str(&format!("{prefix}{k} {v}\n"));
        }
        s
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

/// CSV document with a `#`-prefixed provenance block above the header row.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.header.len());
        self.rows.push(fields);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, prov: &Provenance) -> anyhow::Result<Vec<u8>> {
        let mut out = prov.comment_lines("# ").into_bytes();
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
            w.write_record(&self.header)?;
            for r in &self.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Ok(out)
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    provenance: &'a Provenance,
    data: &'a T,
}

pub fn json_document<T: Serialize>(prov: &Provenance, data: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&Wrapped { provenance: prov, data })?;
    out.push(b'\n');
    Ok(out)
}

pub fn svg_provenance(prov: &Provenance) -> String {
    format!("<!--\n{}-->\n", prov.comment_lines(""))
}

/// Writes through a temporary file in the target directory, then renames over `name`.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    let path = dir.join(name);
    tmp.persist(&path)?;
    Ok(path)
}
