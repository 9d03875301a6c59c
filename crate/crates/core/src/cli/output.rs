use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

/// Schema versions of the files written by the pipelines.
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub schema: String,
    pub schema_version: u32,
    pub sha256: String,
    pub bytes: u64,
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Staging directory next to the final output directory; [`commit`](Self::commit)
/// swaps it into place.
pub struct Staging {
    tmp: PathBuf,
    target: PathBuf,
    files: Vec<FileRecord>,
}

impl Staging {
    pub fn new(target: &Path) -> Result<Self, CliError> {
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| io(&parent, e))?;
        let name = target
            .file_name()
            .ok_or_else(|| {
                CliError::Config(format!("output dir {} has no name", target.display()))
            })?
            .to_string_lossy()
            .into_owned();
        let tmp = parent.join(format!(".{name}.tmp-{}", std::process::id()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| io(&tmp, e))?;
        }
        fs::create_dir(&tmp).map_err(|e| io(&tmp, e))?;
        Ok(Self {
            tmp,
            target: target.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    fn record(&mut self, name: &str, schema: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.tmp.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        self.files.push(FileRecord {
            name: name.to_string(),
            schema: schema.to_string(),
            schema_version: CSV_SCHEMA_VERSION,
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes a CSV file with a fixed header.
    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let path = self.tmp.join(name);
        w.write_record(header).map_err(|e| io(&path, e))?;
        for row in rows {
            w.write_record(row).map_err(|e| io(&path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| io(&path, e))?;
        self.record(name, &header.join(","), &bytes)
    }

    /// Writes the manifest last and moves the directory into place.
    pub fn commit(self, manifest: &impl Serialize) -> Result<PathBuf, CliError> {
        let path = self.tmp.join("manifest.json");
        let mut text = serde_json::to_string_pretty(manifest).map_err(|e| io(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| io(&path, e))?;
        if self.target.exists() {
            let old =
                self.tmp
                    .with_file_name(format!(".{}.old-{}", self.name(), std::process::id()));
            fs::rename(&self.target, &old).map_err(|e| io(&self.target, e))?;
            fs::rename(&self.tmp, &self.target).map_err(|e| io(&self.target, e))?;
            fs::remove_dir_all(&old).map_err(|e| io(&old, e))?;
        } else {
            fs::rename(&self.tmp, &self.target).map_err(|e| io(&self.target, e))?;
        }
        Ok(self.target.clone())
    }

    fn name(&self) -> String {
        self.target
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if self.tmp.exists() {
            let _ = fs::remove_dir_all(&self.tmp);
        }
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    x.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staging_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        fs::create_dir(&target).unwrap();
        fs::write(target.join("stale.csv"), "x").unwrap();
        let mut s = Staging::new(&target).unwrap();
        s.csv("a.csv", &["x", "y"], vec![vec![num(1.0), num(0.1)]])
            .unwrap();
        assert_eq!(s.files()[0].schema, "x,y");
        s.commit(&serde_json::json!({"ok": true})).unwrap();
        assert!(!target.join("stale.csv").exists());
        assert_eq!(
            fs::read_to_string(target.join("a.csv")).unwrap(),
            "x,y\n1,0.1\n"
        );
        assert!(target.join("manifest.json").exists());
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn dropped_staging_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        {
            let mut s = Staging::new(&target).unwrap();
            s.csv("a.csv", &["x"], vec![vec![num(1.0)]]).unwrap();
        }
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e10, std::f64::consts::PI] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "NaN");
    }
}
