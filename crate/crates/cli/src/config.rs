use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use execrep::dedup::DedupConfig;
use execrep::gateway::GatewayConfig;
use execrep::harness::HarnessConfig;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Settings read from the `--config` TOML file. Every section is optional
/// and falls back to the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    /// Worker threads for parsing, rendering and execution.
    pub jobs: Option<usize>,
    /// Directory with `code.txt`, `fs.txt`, `ss.txt`, `vd.txt`, `eval.txt`
    /// replacing the built-in prompt templates.
    pub templates_dir: Option<PathBuf>,
    pub dedup: DedupConfig,
    pub harness: HarnessConfig,
    pub gateway: GatewayConfig,
}

static VAR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}").unwrap());

/// Replace `${NAME}` with the value of the environment variable `NAME`.
pub fn interpolate(text: &str) -> Result<String, CliError> {
    let mut missing = None;
    let out = VAR.replace_all(text, |c: &regex::Captures| match std::env::var(&c[1]) {
        Ok(v) => v,
        Err(_) => {
            missing.get_or_insert_with(|| c[1].to_string());
            String::new()
        }
    });
    match missing {
        Some(name) => Err(CliError::Input(format!("config references unset environment variable {name}"))),
        None => Ok(out.into_owned()),
    }
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(CliConfig::default());
        };
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let text = interpolate(&raw)?;
        let cfg: CliConfig =
            toml::from_str(&text).map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let t = self.dedup.threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(CliError::Input(format!("dedup.threshold must be in (0, 1], got {t}")));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Input("jobs must be at least 1".into()));
        }
        Ok(())
    }
}
