use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub const DEFAULT_SEED: u64 = 7;

/// Parsed `--config` file. Absent file means an empty table.
#[derive(Debug, Default)]
pub struct Config {
    table: toml::Table,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        for key in table.keys() {
            if !matches!(key.as_str(), "seed" | "threads" | "mindet" | "criterion" | "simulate" | "dmt") {
                bail!("config {}: unknown key '{key}'", path.display());
            }
        }
        Ok(Self { table })
    }

    fn top_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => bail!("config: '{key}' must be a nonnegative integer, got {v}"),
        }
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        self.top_u64("seed")
    }

    pub fn threads(&self) -> Result<Option<usize>> {
        Ok(self.top_u64("threads")?.map(|t| t as usize))
    }

    fn section(&self, path: &[&str]) -> Result<Option<&toml::Value>> {
        let mut cur: Option<&toml::Value> = None;
        for (i, key) in path.iter().enumerate() {
            let next = match cur {
                None => self.table.get(*key),
                Some(toml::Value::Table(t)) => t.get(*key),
                Some(_) => bail!("config: '{}' must be a table", path[..i].join(".")),
            };
            match next {
                Some(v) => cur = Some(v),
                None => return Ok(None),
            }
        }
        Ok(cur)
    }

    /// Overlays the values given on the command line on the config section
    /// at `path`.
    pub fn merge<T: Serialize + DeserializeOwned>(&self, path: &[&str], cli: T) -> Result<T> {
        let mut base = match self.section(path)? {
            Some(v @ toml::Value::Table(_)) => serde_json::to_value(v)?,
            Some(_) => bail!("config: '{}' must be a table", path.join(".")),
            None => Value::Object(Default::default()),
        };
        let Value::Object(over) = serde_json::to_value(&cli)? else {
            unreachable!("argument structs serialize to objects")
        };
        let Value::Object(map) = &mut base else { unreachable!() };
        for (k, v) in over {
            if !v.is_null() {
                map.insert(k, v);
            }
        }
        serde_json::from_value(base).with_context(|| format!("config section [{}]", path.join(".")))
    }
}
