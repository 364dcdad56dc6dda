//! Source and service configuration, read from TOML.
//!
//! ```toml
//! rebuild_interval = 3600
//! listen_address = "127.0.0.1:8080"
//! default_limit = 10
//! use_weights = true
//! edge_list = "graph.csv"
//!
//! [[source]]
//! class_id = 1
//! name = "orders"
//! kind = "behavioural"
//! weight = 3
//! path = "orders.csv"
//! format = "csv"
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ars_core::{ClassId, ClassKind, KernelClass};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Csv,
    Jsonl,
}

/// One event file feeding one kernel class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub class_id: ClassId,
    #[serde(rename = "name")]
    pub class_name: String,
    #[serde(default)]
    pub kind: ClassKind,
    #[serde(default = "default_weight")]
    pub weight: u32,
    pub path: PathBuf,
    pub format: SourceFormat,
}

fn default_weight() -> u32 {
    1
}

impl SourceSpec {
    pub fn class(&self) -> Result<KernelClass> {
        Ok(KernelClass::new(
            self.class_id,
            self.class_name.clone(),
            self.kind,
            self.weight,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(rename = "source", default)]
    pub sources: Vec<SourceSpec>,
    #[serde(default = "default_interval")]
    pub rebuild_interval: u64,
    #[serde(default = "default_listen")]
    pub listen_address: String,
    #[serde(default = "default_limit")]
    pub default_limit: usize,
    #[serde(default)]
    pub use_weights: bool,
    /// Where each successful build writes its edge list and sidecars; also
    /// the fallback loaded at startup when the initial build fails.
    #[serde(default)]
    pub edge_list: Option<PathBuf>,
    /// Optional file of valid raw object keys, one per line. Events naming
    /// any other object are counted as malformed.
    #[serde(default)]
    pub allowed_objects: Option<PathBuf>,
}

fn default_interval() -> u64 {
    3600
}

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_limit() -> usize {
    10
}

impl ServiceConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: ServiceConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for source in &mut config.sources {
            source.path = base_dir.join(&source.path);
        }
        config.edge_list = config.edge_list.map(|p| base_dir.join(p));
        config.allowed_objects = config.allowed_objects.map(|p| base_dir.join(p));
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn check(&self) -> Result<()> {
        if self.rebuild_interval < 1 {
            return Err(Error::Config("rebuild_interval must be at least 1 second".into()));
        }
        if self.default_limit < 1 {
            return Err(Error::Config("default_limit must be at least 1".into()));
        }
        check_sources(&self.sources)
    }
}

pub(crate) fn check_sources(sources: &[SourceSpec]) -> Result<()> {
    if sources.is_empty() {
        return Err(Error::Config("no sources configured".into()));
    }
    let mut seen = BTreeSet::new();
    for s in sources {
        if !seen.insert(s.class_id) {
            return Err(Error::Config(format!(
                "class id {} used by more than one source",
                s.class_id
            )));
        }
        if s.weight == 0 {
            return Err(Error::Config(format!("class {} has weight 0", s.class_id)));
        }
    }
    Ok(())
}
