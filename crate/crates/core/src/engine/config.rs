use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use crate::solvers::DEFAULT_BRUTE_FORCE_MAX_VARS;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    MalformedConfig(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Automation {
    #[default]
    Interactive,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverLimits {
    pub brute_force_max_vars: usize,
    pub statevector_max_qubits: usize,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            brute_force_max_vars: DEFAULT_BRUTE_FORCE_MAX_VARS,
            statevector_max_qubits: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub automation: Automation,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    /// Provider name → access token.
    pub tokens: BTreeMap<String, String>,
    pub solver_limits: SolverLimits,
    pub answers_file: Option<PathBuf>,
    /// Unknown keys, kept and echoed into `run_config.json`.
    #[serde(flatten)]
    pub extra: Map<String, Json>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            automation: Automation::Interactive,
            output_dir: PathBuf::from("./runs"),
            seed: None,
            tokens: BTreeMap::new(),
            solver_limits: SolverLimits::default(),
            answers_file: None,
            extra: Map::new(),
        }
    }
}

impl Config {
    pub fn from_json(value: Json) -> Result<Self, ConfigError> {
        if !value.is_object() {
            return Err(ConfigError::MalformedConfig("top level must be an object".into()));
        }
        let config: Config = serde_json::from_value(value).map_err(|e| ConfigError::MalformedConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let value: Json = serde_json::from_str(text).map_err(|e| ConfigError::MalformedConfig(e.to_string()))?;
        Self::from_json(value)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.solver_limits.brute_force_max_vars == 0 || self.solver_limits.statevector_max_qubits == 0 {
            return Err(ConfigError::MalformedConfig("solver limits must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies a JSON object of overrides on top of this config.
    pub fn merged(&self, overrides: &Json) -> Result<Self, ConfigError> {
        let Json::Object(patch) = overrides else {
            return Err(ConfigError::MalformedConfig("overrides must be an object".into()));
        };
        let mut base = match serde_json::to_value(self).expect("config serializes") {
            Json::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        for (k, v) in patch {
            base.insert(k.clone(), v.clone());
        }
        Self::from_json(Json::Object(base))
    }

    /// Config as written to `run_config.json`: token values are masked.
    pub fn redacted_json(&self) -> Json {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(tokens) = v.get_mut("tokens").and_then(Json::as_object_mut) {
            for t in tokens.values_mut() {
                *t = Json::String("<redacted>".into());
            }
        }
        v
    }
}

/// Defaults merged with the file at `path`; a missing file yields defaults.
pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    match std::fs::read_to_string(path) {
        Ok(text) => Config::parse(&text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Config::default()),
        Err(e) => Err(ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn missing_file_gives_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let c = load_config(&dir.path().join("config.json")).unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.automation, Automation::Interactive);
        assert_eq!(c.output_dir, PathBuf::from("./runs"));
    }

    #[test]
    fn partial_file_merges_with_defaults() {
        let c = Config::parse(r#"{"automation":"auto","seed":42,"future_flag":true}"#).unwrap();
        assert_eq!(c.automation, Automation::Auto);
        assert_eq!(c.seed, Some(42));
        assert_eq!(c.solver_limits, SolverLimits::default());
        assert_eq!(c.extra.get("future_flag"), Some(&json!(true)));
        assert_eq!(c.redacted_json()["future_flag"], json!(true));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        for bad in [
            r#"{"automation":"turbo"}"#,
            r#"{"seed":-1}"#,
            r#"{"solver_limits":{"brute_force_max_vars":0}}"#,
            r#"{"tokens":[1]}"#,
            "not json",
            "[]",
        ] {
            assert!(matches!(Config::parse(bad), Err(ConfigError::MalformedConfig(_))), "{bad}");
        }
    }

    #[test]
    fn tokens_are_redacted_and_overrides_apply() {
        let c = Config::parse(r#"{"tokens":{"ibm":"secret"}}"#).unwrap();
        assert!(!c.redacted_json().to_string().contains("secret"));
        let m = c.merged(&json!({"automation":"auto"})).unwrap();
        assert_eq!((m.automation, m.tokens.len()), (Automation::Auto, 1));
        assert!(c.merged(&json!({"automation":"warp"})).is_err());
    }
}
