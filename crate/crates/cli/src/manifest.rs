//! Per-run manifest: config echo, metrics, produced files and timing.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub experiment: String,
    pub seed: u64,
    /// Seconds; the only field that differs between identical reruns.
    pub wall_clock: f64,
    /// Set when the run missed its contract (no junction, no convergence, ...).
    pub flagged: bool,
    pub flags: Vec<String>,
    /// Paths relative to the run directory.
    pub files: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    pub config: toml::Table,
}

impl ExperimentManifest {
    pub fn new(experiment: &str, seed: u64, config: toml::Table) -> Self {
        Self {
            experiment: experiment.into(),
            seed,
            wall_clock: 0.0,
            flagged: false,
            flags: Vec::new(),
            files: Vec::new(),
            metrics: BTreeMap::new(),
            config,
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn flag(&mut self, reason: impl Into<String>) {
        self.flagged = true;
        self.flags.push(reason.into());
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    /// Error unless every listed metric is present.
    pub fn require(&self, keys: &[&str]) -> Result<()> {
        let missing: Vec<&str> = keys
            .iter()
            .copied()
            .filter(|k| !self.metrics.contains_key(*k))
            .collect();
        if !missing.is_empty() {
            bail!("manifest of {} lacks metrics {missing:?}", self.experiment);
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string(self)?;
        std::fs::write(dir.join(MANIFEST_FILE), text)
            .with_context(|| format!("writing manifest in {}", dir.display()))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(toml::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = ExperimentManifest::new("demo", 3, toml::Table::new());
        m.metric("energy", 3.5);
        m.metric("gap", f64::NAN);
        m.files.push("a.csv".into());
        m.write(dir.path()).unwrap();
        let back = ExperimentManifest::read(dir.path()).unwrap();
        assert_eq!(back.experiment, "demo");
        assert_eq!(back.get("energy"), Some(3.5));
        assert!(back.get("gap").unwrap().is_nan());
        assert!(m.require(&["energy", "gap"]).is_ok());
        assert!(m.require(&["sup"]).is_err());
    }
}
