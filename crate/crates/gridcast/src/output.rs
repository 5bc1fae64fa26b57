//! On-disk layout of an experiment run:
//!
//! ```text
//! <out>/<experiment>/<table>.csv        every table
//! <out>/<experiment>/<table>[_g].dat    gnuplot data for plotted tables
//! <out>/<experiment>/<table>.plt        gnuplot script
//! <out>/<experiment>/<artifact>         models, LP dumps, datasets
//! <out>/<experiment>/config.toml        the resolved config
//! <out>/<experiment>/manifest.json
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::error::{HarnessError, Result};
use crate::experiments::ExperimentOutput;
use crate::plot::emit_plotdata;

pub const TOOLKIT: &str = "gridcast";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub toolkit: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    /// Relative path to SHA-256 of every file written.
    pub files: BTreeMap<String, String>,
    /// Wall-clock seconds. Not part of any CSV.
    pub timings: BTreeMap<String, f64>,
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

/// Writes everything under `root/<experiment>/` and returns that directory.
pub fn write_output(root: &Path, cfg: &RunConfig, out: &ExperimentOutput) -> Result<PathBuf> {
    let dir = root.join(out.kind.name());
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for fig in &out.figures {
        match &fig.plot {
            Some(kind) => written.extend(emit_plotdata(&fig.table, kind, &dir)?),
            None => {
                let path = dir.join(format!("{}.csv", fig.table.name));
                write(&path, &fig.table.to_csv_bytes())?;
                written.push(path);
            }
        }
    }
    for (name, bytes) in &out.artifacts {
        let path = dir.join(name);
        write(&path, bytes)?;
        written.push(path);
    }
    let config_path = dir.join("config.toml");
    write(&config_path, cfg.to_toml().as_bytes())?;
    written.push(config_path);

    let mut files = BTreeMap::new();
    for path in written {
        let bytes = std::fs::read(&path).map_err(|e| HarnessError::io(&path, e))?;
        let rel = path
            .strip_prefix(&dir)
            .expect("written under dir")
            .to_string_lossy()
            .replace('\\', "/");
        files.insert(rel, hex(&Sha256::digest(&bytes)));
    }
    let manifest = Manifest {
        experiment: out.kind.name().into(),
        toolkit: TOOLKIT.into(),
        version: VERSION.into(),
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        files,
        timings: out.timings.clone(),
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write(&path, text.as_bytes())?;
    Ok(dir)
}
