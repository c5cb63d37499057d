//! Parameter resolution: command-line flag, then `--config` file, then default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::CliError;

/// `key = value` lines; `#` starts a comment. Repeated keys accumulate.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, Vec<String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key=value", n + 1))
            })?;
            entries
                .entry(normalize(k.trim()))
                .or_default()
                .push(v.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    fn get(&self, key: &str) -> Option<&[String]> {
        self.entries.get(key).map(Vec::as_slice)
    }
}

fn normalize(key: &str) -> String {
    key.trim_start_matches("--").replace('_', "-")
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Default,
    Config,
    Flag,
}

#[derive(Clone, Debug, Serialize)]
pub struct Parameter {
    pub name: String,
    pub value: String,
    pub source: Source,
}

/// Resolves parameters and remembers where each value came from.
pub struct Resolver {
    config: ConfigFile,
    pub log: Vec<Parameter>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Self, CliError> {
        let config = match config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Resolver {
            config,
            log: Vec::new(),
        })
    }

    fn record(&mut self, name: &str, value: String, source: Source) {
        if source != Source::Default {
            log::info!("{name} = {value} ({source:?})");
        }
        self.log.push(Parameter {
            name: name.into(),
            value,
            source,
        });
    }

    pub fn optional<T>(&mut self, name: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + ToString,
    {
        if let Some(v) = flag {
            self.record(name, v.to_string(), Source::Flag);
            return Ok(Some(v));
        }
        if let Some(vals) = self.config.get(name) {
            let raw = vals.last().expect("nonempty").clone();
            let v = raw
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("config: cannot parse {name} = '{raw}'")))?;
            self.record(name, raw, Source::Config);
            return Ok(Some(v));
        }
        Ok(None)
    }

    pub fn value<T>(&mut self, name: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + ToString,
    {
        match self.optional(name, flag)? {
            Some(v) => Ok(v),
            None => {
                self.record(name, default.to_string(), Source::Default);
                Ok(default)
            }
        }
    }

    /// Repeatable parameters: flags replace the config list entirely.
    pub fn list(&mut self, name: &str, flags: &[String]) -> Vec<String> {
        let (vals, source) = if !flags.is_empty() {
            (flags.to_vec(), Source::Flag)
        } else if let Some(v) = self.config.get(name) {
            (v.to_vec(), Source::Config)
        } else {
            (Vec::new(), Source::Default)
        };
        for v in &vals {
            self.record(name, v.clone(), source);
        }
        vals
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let cfg = ConfigFile::parse("grid = 512\n# comment\ndt=0.01\nrho = 1\nrho = 2\n").unwrap();
        let mut r = Resolver {
            config: cfg,
            log: Vec::new(),
        };
        assert_eq!(r.value("grid", Some(64usize), 256).unwrap(), 64);
        assert_eq!(r.value("dt", None, 1e-3).unwrap(), 0.01);
        assert_eq!(r.value("dealias", None, 0.5).unwrap(), 0.5);
        assert_eq!(r.list("rho", &[]), vec!["1", "2"]);
        assert_eq!(r.log[0].source, Source::Flag);
        assert_eq!(r.log[1].source, Source::Config);
        assert_eq!(r.log[2].source, Source::Default);
    }

    #[test]
    fn malformed_lines_are_usage_errors() {
        assert!(ConfigFile::parse("grid 512").is_err());
    }
}
