use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::imaging::{ImageGrid, PgmScaling};

/// Provenance attached to every artifact of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunHeader {
    pub command: String,
    pub args: serde_json::Value,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
}

/// Writes artifacts atomically into one directory and remembers their paths.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    header: RunHeader,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    header: &'a RunHeader,
    result: &'a T,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>, header: RunHeader) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            header,
            written: Vec::new(),
        })
    }

    pub fn header(&self) -> &RunHeader {
        &self.header
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn into_written(self) -> Vec<PathBuf> {
        self.written
    }

    /// Same header, different directory (used by figure presets).
    pub fn subdir(&self, name: &str) -> Result<Self> {
        Self::new(self.dir.join(name), self.header.clone())
    }

    pub fn absorb(&mut self, other: Self) {
        self.written.extend(other.written);
    }

    /// Temp file in the target directory, then rename: readers never see a
    /// partial file.
    fn write_atomic(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&Envelope {
            header: &self.header,
            result,
        })?;
        text.push('\n');
        self.write_atomic(name, text.as_bytes())
    }

    fn provenance_lines(&self) -> Vec<String> {
        vec![
            format!("command={}", self.header.command),
            format!("config_hash={}", self.header.config_hash),
            format!("seed={}", self.header.seed),
        ]
    }

    /// CSV preceded by `#` provenance lines, then the header row.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut text = String::new();
        for line in self.provenance_lines() {
            text.push_str(&format!("# {line}\n"));
        }
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.write_atomic(name, text.as_bytes())
    }

    /// Raw text with provenance prepended as `#` lines.
    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut text = String::new();
        for line in self.provenance_lines() {
            text.push_str(&format!("# {line}\n"));
        }
        text.push_str(body);
        self.write_atomic(name, text.as_bytes())
    }

    pub fn pgm(&mut self, name: &str, img: &ImageGrid, scaling: PgmScaling) -> Result<()> {
        let bytes = img.to_pgm(scaling, &self.provenance_lines());
        self.write_atomic(name, &bytes)
    }
}
