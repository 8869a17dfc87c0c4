//! Experiment configuration: a flat `key = value` text format plus typed
//! accessors. Lines starting with `#` and blank lines are ignored; keys are
//! lower-case `[a-z0-9_-]`; later assignments override earlier ones.
//!
//! Reserved keys: `experiment` (required), `seed`, `replicas`, `out`,
//! `format`, `schema`. Everything else is an experiment parameter.

use crate::{Error, Result};
use std::collections::BTreeMap;

pub const CONFIG_SCHEMA: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub replicas: usize,
    pub out: Option<String>,
    pub format: ReportFormat,
    pub schema: String,
    pub params: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            seed: 0,
            replicas: 1,
            out: None,
            format: ReportFormat::Csv,
            schema: CONFIG_SCHEMA.to_string(),
            params: BTreeMap::new(),
        }
    }

    /// Parse the flat key-value text format.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
            {
                return Err(Error::Parse(format!(
                    "line {}: bad key '{}'",
                    lineno + 1,
                    key
                )));
            }
            if value.contains(',') || value.contains('"') {
                return Err(Error::Parse(format!(
                    "line {}: values may not contain commas or quotes",
                    lineno + 1
                )));
            }
            map.insert(key.to_string(), value.to_string());
        }
        let experiment = map
            .remove("experiment")
            .ok_or_else(|| Error::Config("missing required key 'experiment'".into()))?;
        let schema = map.remove("schema").unwrap_or_else(|| CONFIG_SCHEMA.into());
        if schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported config schema '{schema}' (this build reads schema {CONFIG_SCHEMA})"
            )));
        }
        let seed = match map.remove("seed") {
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad seed '{s}'")))?,
            None => 0,
        };
        let replicas = match map.remove("replicas") {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad replicas '{s}'")))?,
            None => 1,
        };
        if replicas == 0 {
            return Err(Error::Config("replicas must be >= 1".into()));
        }
        let out = map.remove("out");
        let format = match map.remove("format") {
            Some(s) => ReportFormat::parse(&s)?,
            None => ReportFormat::Csv,
        };
        Ok(Self {
            experiment,
            seed,
            replicas,
            out,
            format,
            schema,
            params: map,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("parameter '{key}': bad float '{s}'"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("parameter '{key}': bad integer '{s}'"))),
        }
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.params
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string())
    }

    /// Canonical `key=value;...` string of all experiment parameters.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_format() {
        let text = "\n# an experiment\nexperiment = ou-moments\nseed = 42\nreplicas = 100\nk = 3\nt = 0.5\n";
        let cfg = ExperimentConfig::parse_str(text).unwrap();
        assert_eq!(cfg.experiment, "ou-moments");
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.replicas, 100);
        assert_eq!(cfg.get_f64("t", 0.0).unwrap(), 0.5);
        assert_eq!(cfg.get_usize("k", 0).unwrap(), 3);
        assert_eq!(cfg.params_string(), "k=3;t=0.5");
        assert_eq!(cfg.schema, CONFIG_SCHEMA);
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(ExperimentConfig::parse_str("no equals sign").is_err());
        assert!(ExperimentConfig::parse_str("experiment = x\nBadKey = 1").is_err());
        assert!(ExperimentConfig::parse_str("seed = 1").is_err()); // missing experiment
        assert!(ExperimentConfig::parse_str("experiment = x\nreplicas = 0").is_err());
        assert!(ExperimentConfig::parse_str("experiment = x\nseed = -3").is_err());
        assert!(ExperimentConfig::parse_str("experiment = x\nschema = 99").is_err());
        assert!(ExperimentConfig::parse_str("experiment = x\nv = a,b").is_err());
        assert!(ExperimentConfig::parse_str("experiment = x\nformat = yaml").is_err());
    }

    #[test]
    fn later_assignments_override() {
        let cfg = ExperimentConfig::parse_str("experiment = x\nseed = 1\nseed = 2").unwrap();
        assert_eq!(cfg.seed, 2);
    }
}
