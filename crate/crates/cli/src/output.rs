//! Output files and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bvlasov_core::{ScenarioConfig, Trajectory};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub bvlasov: &'static str,
    pub manifest_format: u32,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

/// Inventory of one invocation. Written last; every listed file exists and
/// matches its checksum.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: ScenarioConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    pub versions: Versions,
    pub threads: usize,
    pub timing: Timing,
    pub exit_code: i32,
    pub files: Vec<FileEntry>,
}

/// Collects the files of one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len() as u64,
            sha256: hex(&Sha256::digest(contents)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<()> {
        manifest.files = self.files;
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes
        .iter()
        .fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// `t,x,u` for every snapshot.
pub fn fluid_csv(traj: &Trajectory) -> String {
    let g = &traj.grid;
    let mut out = String::from("t,x,u\n");
    for s in &traj.snapshots {
        for (i, u) in s.u.values.iter().enumerate() {
            let _ = writeln!(out, "{:?},{:?},{:?}", s.time, g.x(i), u);
        }
    }
    out
}

/// `t,x,v,f` for every snapshot that kept the kinetic field.
pub fn kinetic_csv(traj: &Trajectory) -> Option<String> {
    let g = &traj.grid;
    let mut out = String::from("t,x,v,f\n");
    let mut any = false;
    for s in &traj.snapshots {
        let Some(f) = &s.f else { continue };
        any = true;
        for ((i, k), val) in f.values.indexed_iter() {
            let _ = writeln!(out, "{:?},{:?},{:?},{:?}", s.time, g.x(i), g.v(k), val);
        }
    }
    any.then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            hex(&Sha256::digest(b"abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            let s = format!("{x:?}");
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
