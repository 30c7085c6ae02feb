use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "ADASPLIT_OUT_DIR";

/// `--out`, then `ADASPLIT_OUT_DIR`, then the config value, then `out`.
pub fn resolve_dir(flag: Option<&Path>, configured: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    configured.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("out"))
}

pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let probe = dir.join(".write-test");
    File::create(&probe)
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| CliError::Config(format!("output directory {} is not writable: {e}", dir.display())))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Reproducibility record written next to every result set. Contains no
/// timestamps, so repeated runs produce identical manifests.
pub struct Manifest {
    pub command: &'static str,
    pub config: Option<(PathBuf, String)>,
    pub scheme_files: Vec<(PathBuf, String)>,
    pub jobs: Option<usize>,
    pub seed: u64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str, config: Option<&Path>, schemes: &[PathBuf], jobs: Option<usize>, seed: u64) -> Result<Self, CliError> {
        let config = match config {
            Some(p) => Some((p.to_path_buf(), sha256_file(p)?)),
            None => None,
        };
        let scheme_files = schemes
            .iter()
            .map(|p| Ok((p.clone(), sha256_file(p)?)))
            .collect::<Result<_, CliError>>()?;
        Ok(Manifest {
            command,
            config,
            scheme_files,
            jobs,
            seed,
            outputs: Vec::new(),
        })
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut t = toml::Table::new();
        t.insert("command".into(), self.command.into());
        t.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        if let Some((p, h)) = &self.config {
            let mut c = toml::Table::new();
            c.insert("path".into(), p.display().to_string().into());
            c.insert("sha256".into(), h.clone().into());
            t.insert("config".into(), c.into());
        }
        let schemes: Vec<toml::Value> = self
            .scheme_files
            .iter()
            .map(|(p, h)| {
                let mut c = toml::Table::new();
                c.insert("path".into(), p.display().to_string().into());
                c.insert("sha256".into(), h.clone().into());
                c.into()
            })
            .collect();
        t.insert("scheme_files".into(), schemes.into());
        t.insert("jobs".into(), self.jobs.map(|j| j as i64).unwrap_or(0).into());
        t.insert("seed".into(), (self.seed as i64).into());
        t.insert("outputs".into(), self.outputs.clone().into());
        let text = toml::to_string(&t).map_err(|e| CliError::Config(e.to_string()))?;
        let mut w = create(&dir.join("manifest.toml"))?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}
