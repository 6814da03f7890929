use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;

#[derive(Serialize)]
struct Manifest<'a> {
    stage: &'a str,
    tool_version: &'a str,
    seed: u64,
    config_sha256: String,
    config: &'a PipelineConfig,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wall_time_seconds: f64,
}

pub fn config_hash(cfg: &PipelineConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// One running stage: tracks the files it reads and writes and records them
/// in `<out>/<stage>/manifest.json` when finished.
pub struct Stage<'a> {
    name: &'static str,
    cfg: &'a PipelineConfig,
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: Instant,
}

impl<'a> Stage<'a> {
    pub fn begin(name: &'static str, cfg: &'a PipelineConfig) -> Result<Self> {
        let dir = cfg.out(name);
        std::fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        log::info!("stage {name}: writing to {}", dir.display());
        Ok(Self {
            name,
            cfg,
            dir,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Path of an upstream artifact, which must already exist.
    pub fn input(&mut self, path: PathBuf, produced_by: &str) -> Result<PathBuf> {
        if !path.is_file() {
            bail!("missing upstream artifact {} (produced by the `{produced_by}` stage)", path.display());
        }
        self.inputs.push(path.clone());
        Ok(path)
    }

    /// Artifact of another stage under the output directory.
    pub fn artifact(&mut self, stage: &str, file: &str) -> Result<PathBuf> {
        self.input(self.cfg.out(stage).join(file), stage)
    }

    pub fn open(&mut self, stage: &str, file: &str) -> Result<BufReader<File>> {
        let path = self.artifact(stage, file)?;
        open(&path)
    }

    pub fn create(&mut self, file: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(file);
        let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        self.outputs.push(path);
        Ok(BufWriter::new(f))
    }

    pub fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        let mut w = self.create(file)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        let manifest = Manifest {
            stage: self.name,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: self.cfg.seed,
            config_sha256: config_hash(self.cfg)?,
            config: self.cfg,
            inputs: self.inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = self.dir.join("manifest.json");
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
        log::info!("stage {} done in {:.2}s", self.name, manifest.wall_time_seconds);
        Ok(())
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}
