//! Loading a run, applying command-line overrides, and the manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use ornithopter::config::{parse_config, to_toml, RunConfig, Scenario};

use crate::output::{write_atomic, CsvFile, OutputRecord};
use crate::Common;

/// Why a command stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad or unreadable configuration, or an output that cannot be written.
    Config(String),
    /// The run itself broke down.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "{m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<ornithopter::Error> for Failure {
    fn from(e: ornithopter::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

pub fn write_failed(path: &Path, e: std::io::Error) -> Failure {
    Failure::Config(format!("cannot write {}: {e}", path.display()))
}

#[derive(Serialize)]
struct Versions {
    ornithopter: &'static str,
    #[serde(rename = "ornithopter-cli")]
    cli: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: String,
    config_sha256: &'a str,
    /// Hash of the configuration after overrides, as written to
    /// `config.toml`.
    effective_config_sha256: String,
    seed: u64,
    overrides: &'a BTreeMap<String, String>,
    versions: Versions,
    created_unix_s: u64,
    outputs: &'a [OutputRecord],
}

/// A loaded configuration together with where its outputs go.
pub struct Run {
    command: &'static str,
    config_path: PathBuf,
    config_sha256: String,
    pub config: RunConfig,
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    overrides: BTreeMap<String, String>,
    outputs: Vec<OutputRecord>,
}

impl Run {
    pub fn load(command: &'static str, c: &Common) -> Result<Self, Failure> {
        let path = &c.config;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;

        let mut overrides = BTreeMap::new();
        if let Some(dt) = c.dt {
            config.integrator.dt = dt;
            overrides.insert("dt".into(), dt.to_string());
        }
        if let Some(d) = c.duration {
            config.integrator.duration = Some(d);
            overrides.insert("duration".into(), d.to_string());
        }
        if let Some(seed) = c.seed {
            config.seed = seed;
            overrides.insert("seed".into(), seed.to_string());
        }
        if let Some(m) = c.inertia_mode {
            config.morphology.inertia_mode = m.into();
            overrides.insert("inertia_mode".into(), format!("{m:?}").to_lowercase());
        }
        if let Some(s) = c.stride {
            config.output.stride = s;
            overrides.insert("stride".into(), s.to_string());
        }

        let base = path.parent().unwrap_or(Path::new("."));
        let (scenario, warnings) =
            config.resolve(base).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        for w in &warnings {
            warn!("{w}");
        }
        let out_dir = c.out.clone().unwrap_or_else(|| config.output.dir.clone());
        std::fs::create_dir_all(&out_dir)
            .map_err(|e| Failure::Config(format!("cannot create {}: {e}", out_dir.display())))?;
        info!("{command}: {} -> {}", path.display(), out_dir.display());
        Ok(Self {
            command,
            config_path: path.clone(),
            config_sha256: hex::encode(Sha256::digest(text.as_bytes())),
            config,
            scenario,
            out_dir,
            overrides,
            outputs: Vec::new(),
        })
    }

    pub fn csv(&self, name: &str, columns: &[(String, &str)]) -> Result<CsvFile, Failure> {
        CsvFile::create(&self.out_dir, name, columns).map_err(|e| write_failed(&self.out_dir.join(name), e))
    }

    pub fn commit(&mut self, f: CsvFile) -> Result<(), Failure> {
        let dir = self.out_dir.clone();
        let rec = f.commit().map_err(|e| write_failed(&dir, e))?;
        info!("wrote {} ({} rows)", rec.file, rec.rows);
        self.outputs.push(rec);
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.out_dir.join(name);
        let rec = write_atomic(&path, bytes).map_err(|e| write_failed(&path, e))?;
        info!("wrote {}", rec.file);
        self.outputs.push(rec);
        Ok(())
    }

    /// Writes the effective configuration and the manifest.
    pub fn finish(mut self) -> Result<(), Failure> {
        let effective = to_toml(&self.config);
        self.write("config.toml", effective.as_bytes())?;
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let manifest = Manifest {
            command: self.command,
            config: self.config_path.display().to_string(),
            config_sha256: &self.config_sha256,
            effective_config_sha256: hex::encode(Sha256::digest(effective.as_bytes())),
            seed: self.scenario.seed,
            overrides: &self.overrides,
            versions: Versions { ornithopter: ornithopter::VERSION, cli: env!("CARGO_PKG_VERSION") },
            created_unix_s: created,
            outputs: &self.outputs,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.out_dir.join("manifest.json");
        write_atomic(&path, json.as_bytes()).map_err(|e| write_failed(&path, e))?;
        Ok(())
    }
}
