use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance stamped on every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
}

impl Metadata {
    pub fn new(command: &str, config_toml: &str) -> Self {
        let digest = Sha256::digest(config_toml.as_bytes());
        Metadata {
            tool: "embedvqe",
            version: VERSION,
            command: command.into(),
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }

    pub fn csv_header(&self) -> String {
        format!(
            "# {} {} command={} config_sha256={}\n",
            self.tool, self.version, self.command, self.config_sha256
        )
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Output {
    pub dir: PathBuf,
    pub meta: Metadata,
}

impl Output {
    pub fn new(dir: impl Into<PathBuf>, meta: Metadata) -> std::io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Output { dir, meta })
    }

    /// Write through a temporary file in the same directory and rename.
    pub fn write_atomic(&self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// CSV with the metadata comment line, a header row and one row per
    /// record.
    pub fn write_csv(&self, name: &str, columns: &[&str], rows: &[Vec<String>]) -> std::io::Result<PathBuf> {
        let mut s = self.meta.csv_header();
        s.push_str(&columns.join(","));
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.write_atomic(name, s.as_bytes())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, body: &T) -> std::io::Result<PathBuf> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            meta: &'a Metadata,
            #[serde(flatten)]
            body: &'a T,
        }
        let text = serde_json::to_string_pretty(&Wrapped { meta: &self.meta, body }).map_err(std::io::Error::other)?;
        self.write_atomic(name, text.as_bytes())
    }
}

pub fn file_tag(parts: &[&str]) -> String {
    parts.iter().map(|p| p.replace(['/', ' '], "_")).collect::<Vec<_>>().join("_")
}

pub fn u_tag(u: f64) -> String {
    format!("U{u:.4}")
}

pub fn exists(p: &str) -> bool {
    Path::new(p).exists()
}
