//! Flat `key = value` run configuration with flag overrides.
//!
//! Keys may be scoped per command (`fit.seed = 7`) or global (`seed = 7`);
//! scoped keys win over global ones, and command-line flags win over both.

use std::collections::BTreeMap;
use std::path::Path;

use ordfreq::selection::{Assignment, ParamValue};

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct RunConfig {
    map: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                path: path.display().to_string(),
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { map })
    }

    fn lookup(&self, command: &str, key: &str) -> Option<&str> {
        self.map
            .get(&format!("{command}.{key}"))
            .or_else(|| self.map.get(key))
            .map(String::as_str)
    }

    /// Flag value if present, else config value, else default.
    pub fn resolve<T>(
        &self,
        flag: Option<T>,
        command: &str,
        key: &str,
        default: T,
    ) -> Result<T, CliError>
    where
        T: std::str::FromStr,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.lookup(command, key) {
            Some(raw) => raw.parse().map_err(|_| CliError::Invalid(format!(
                "config key `{key}`: cannot parse `{raw}`"
            ))),
            None => Ok(default),
        }
    }

    /// Like [`resolve`] but with no default: `None` when absent everywhere.
    pub fn resolve_opt<T>(
        &self,
        flag: Option<T>,
        command: &str,
        key: &str,
    ) -> Result<Option<T>, CliError>
    where
        T: std::str::FromStr,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.lookup(command, key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Invalid(format!("config key `{key}`: cannot parse `{raw}`"))),
            None => Ok(None),
        }
    }
}

/// Parses a hyperparameter file (`key = value` lines) into an assignment;
/// integers, then reals, then bare strings.
pub fn parse_params_file(path: &Path) -> Result<Assignment, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
            path: path.display().to_string(),
            line: i + 1,
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim().to_string(), value.trim());
        let parsed = if let Ok(v) = value.parse::<i64>() {
            ParamValue::Int(v)
        } else if let Ok(v) = value.parse::<f64>() {
            ParamValue::Real(v)
        } else {
            ParamValue::Categorical(value.to_string())
        };
        pairs.push((key, parsed));
    }
    Ok(Assignment::from_pairs(pairs))
}

/// Output directory fallback: `ORDFREQ_OUT_DIR` or the working directory.
pub fn default_out_dir() -> std::path::PathBuf {
    std::env::var_os("ORDFREQ_OUT_DIR").map_or_else(|| ".".into(), Into::into)
}
