//! Staged output files, input digests and run manifests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest(path: &str, bytes: &[u8]) -> InputDigest {
    InputDigest {
        path: path.to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

#[derive(Debug, Serialize)]
pub struct ScreenedParameter {
    pub name: String,
    pub low: f64,
    pub high: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_star: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub arguments: Vec<String>,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pathway: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub screened_parameters: Vec<ScreenedParameter>,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            arguments: std::env::args().collect(),
            inputs: Vec::new(),
            pathway: None,
            seed: None,
            realizations: None,
            workers: None,
            screened_parameters: Vec::new(),
            wall_clock_seconds: 0.0,
            outputs: Vec::new(),
        }
    }
}

/// Files held in memory until the run has succeeded.
pub struct Staged {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
    started: Instant,
}

impl Staged {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// Writes every file plus `manifest.json` through temporary names and
    /// renames them into place.
    pub fn commit(mut self, mut manifest: RunManifest) -> io::Result<Vec<PathBuf>> {
        manifest.outputs = self.files.iter().map(|(n, _)| n.clone()).collect();
        manifest.outputs.push("manifest.json".into());
        manifest.wall_clock_seconds = self.started.elapsed().as_secs_f64();
        let json = serde_json::to_vec_pretty(&manifest).map_err(io::Error::other)?;
        self.files.push(("manifest.json".into(), json));

        fs::create_dir_all(&self.dir)?;
        let pid = std::process::id();
        let mut temps = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let tmp = self.dir.join(format!(".{name}.{pid}.tmp"));
            if let Err(e) = fs::write(&tmp, bytes) {
                for (t, _) in &temps {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(e);
            }
            temps.push((tmp, self.dir.join(name)));
        }
        let mut written = Vec::with_capacity(temps.len());
        for (tmp, dest) in temps {
            fs::rename(&tmp, &dest)?;
            written.push(dest);
        }
        Ok(written)
    }
}
