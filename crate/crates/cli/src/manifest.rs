//! Run manifests: everything needed to repeat a run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::CliError;

pub const TOOL: &str = "l3ppi";
pub const STREAMS: [&str; 4] = ["data", "init", "gumbel", "dropout"];

/// Config keys naming input files, in digest order.
pub const INPUT_KEYS: [&str; 5] = ["net", "emb", "split", "surrogate", "head"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub seed: u64,
    pub streams: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Every config key, defaults included.
    pub config: serde_json::Map<String, serde_json::Value>,
    pub seeds: Seeds,
    /// Digest of every input file, keyed by config key. A split also
    /// records its JSON sidecar under `split.sidecar`.
    pub inputs: BTreeMap<String, InputDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot read input {}: {e}", path.display())))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

/// Digests of the inputs a config points at.
pub fn input_digests(cfg: &Config) -> Result<BTreeMap<String, InputDigest>, CliError> {
    let mut out = BTreeMap::new();
    for key in INPUT_KEYS {
        let Some(path) = cfg.optional(key) else { continue };
        let p = Path::new(path);
        out.insert(
            key.to_string(),
            InputDigest {
                path: path.to_string(),
                sha256: sha256_file(p)?,
            },
        );
        if key == "split" {
            let sidecar = p.with_extension("json");
            out.insert(
                "split.sidecar".to_string(),
                InputDigest {
                    path: sidecar.display().to_string(),
                    sha256: sha256_file(&sidecar)?,
                },
            );
        }
    }
    Ok(out)
}

impl RunManifest {
    pub fn new(subcommand: &str, cfg: &Config) -> Result<Self, CliError> {
        let serde_json::Value::Object(config) = cfg.to_json() else {
            unreachable!("config serializes to an object")
        };
        Ok(Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config,
            seeds: Seeds {
                seed: cfg.u64("seed"),
                streams: STREAMS.iter().map(|s| s.to_string()).collect(),
            },
            inputs: input_digests(cfg)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("manifest {} is malformed: {e}", path.display())))
    }

    /// The config this manifest recorded; fails on keys this build does
    /// not know.
    pub fn to_config(&self) -> Result<Config, CliError> {
        let mut cfg = Config::default();
        cfg.merge_json(&self.config)?;
        Ok(cfg)
    }

    /// Fails when an input file no longer matches its recorded digest.
    pub fn verify_inputs(&self) -> Result<(), CliError> {
        for (key, d) in &self.inputs {
            let now = sha256_file(Path::new(&d.path))?;
            if now != d.sha256 {
                return Err(CliError::Data(format!(
                    "input `{key}` ({}) changed since the recorded run",
                    d.path
                )));
            }
        }
        Ok(())
    }
}
