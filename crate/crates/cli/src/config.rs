//! `key = value` config files: one pair per line, `#` starts a comment,
//! blank lines ignored, duplicate keys rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mvsk::{Error, Result};

#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn empty() -> ConfigFile {
        ConfigFile::default()
    }

    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!(
                    "{}:{}: duplicate key '{key}'",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        Ok(ConfigFile { values })
    }

    /// Loads the file when given, otherwise yields an empty config.
    pub fn load_opt(path: Option<&PathBuf>) -> Result<ConfigFile> {
        match path {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::empty()),
        }
    }

    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for key in self.values.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown config key '{key}' (allowed: {})",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Flag value wins over the config value; the default applies last.
pub fn resolve<T, E>(
    flag: Option<T>,
    cfg: &ConfigFile,
    key: &str,
    default: Option<T>,
) -> Result<T>
where
    T: std::str::FromStr<Err = E>,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(s) = cfg.get(key) {
        return s
            .parse()
            .map_err(|_| Error::Config(format!("config key {key}: cannot parse '{s}'")));
    }
    default.ok_or_else(|| Error::Config(format!("missing required setting '{key}'")))
}
