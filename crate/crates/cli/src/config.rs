//! Optional defaults from the file named by `TCLQEM_CONFIG`.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

pub const CONFIG_ENV: &str = "TCLQEM_CONFIG";

#[derive(Debug, Default, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub x_start: Option<f64>,
    pub x_end: Option<f64>,
    pub steps: Option<usize>,
    pub gamma0_omega_tau: Option<Vec<f64>>,
    pub omega_c_tau_s: Option<f64>,
    pub delta0: Option<f64>,
    pub tau_s: Option<f64>,
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Reads the file named by the environment, or returns empty defaults.
    pub fn from_env() -> anyhow::Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }
}
