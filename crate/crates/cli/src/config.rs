//! Flat key=value configuration file, mirroring the CLI flags. Precedence is
//! always flag, then config file, then built-in default.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    /// key -> (value, 1-based line number)
    values: HashMap<String, (String, usize)>,
}

impl ConfigFile {
    pub fn empty() -> ConfigFile {
        ConfigFile::default()
    }

    /// Parse a config file. Lines are `key = value`; blank lines and lines
    /// starting with `#` are ignored. Any other shape is a fatal error with
    /// a line number.
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{} line {}: expected `key = value`, got {:?}",
                    path.display(),
                    idx + 1,
                    raw
                );
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                bail!("{} line {}: empty key", path.display(), idx + 1);
            }
            values.insert(key, (value.trim().to_string(), idx + 1));
        }
        Ok(ConfigFile { values })
    }

    pub fn get_str(&self, key: &str) -> Option<String> {
        self.values.get(key).map(|(v, _)| v.clone())
    }

    /// Typed lookup; a value that fails to parse is fatal, with the line
    /// number it came from.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((value, line)) => match value.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config line {line}: invalid value {value:?} for {key}: {e}"),
            },
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        match self.values.get(key) {
            None => Ok(None),
            Some((value, line)) => match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(Some(true)),
                "false" | "no" | "0" | "off" => Ok(Some(false)),
                other => bail!("config line {line}: invalid boolean {other:?} for {key}"),
            },
        }
    }
}

/// flag > config file > default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Boolean flags cannot distinguish "absent" from "false", so a set flag
/// forces true and the file only matters when the flag is unset.
pub fn resolve_flag(flag_set: bool, file: Option<bool>, default: bool) -> bool {
    if flag_set {
        true
    } else {
        file.unwrap_or(default)
    }
}
