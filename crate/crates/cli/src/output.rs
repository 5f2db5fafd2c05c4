use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// Writes `bytes` next to `path` under a temporary name, then renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Plain-text record of one command run. Numerical outputs are reproducible
/// from the parameters listed here; only timing columns vary between runs.
pub struct Manifest {
    command: &'static str,
    params: Vec<(String, String)>,
    seed: Option<u64>,
    config_hash: Option<String>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Manifest { command, params: Vec::new(), seed: None, config_hash: None, outputs: Vec::new() }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    pub fn config_hash(&mut self, hash: Option<String>) -> &mut Self {
        self.config_hash = hash;
        self
    }

    /// Writes `bytes` atomically and records the path.
    pub fn emit(&mut self, path: PathBuf, bytes: &[u8]) -> std::io::Result<()> {
        write_atomic(&path, bytes)?;
        self.outputs.push(path);
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        let _ = writeln!(out, "tool_version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "seed = {}", self.seed.map_or("none".to_string(), |s| s.to_string()));
        let _ = writeln!(out, "config_sha256 = {}", self.config_hash.as_deref().unwrap_or("none"));
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k} = {v}");
        }
        for p in &self.outputs {
            let _ = writeln!(out, "output = {}", p.display());
        }
        out
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}
