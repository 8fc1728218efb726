//! Scenario overrides from a JSON config file and `key=value` pairs.
//!
//! A config file looks like
//!
//! ```json
//! { "version": 1, "scenario": { "num_runs": 10, "env": { "growth_rate": 1.01 } } }
//! ```
//!
//! and is merged into the chosen scenario. `--set` keys are dotted paths into
//! the same structure, e.g. `env.growth_rate=1.01` or
//! `agent.params.temperature=2`. Values are parsed as JSON when possible and
//! taken as strings otherwise.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::scenario::Scenario;
use crate::error::{config_err, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    #[serde(default)]
    pub scenario: Value,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = serde_json::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            return Err(config_err(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        if !(cfg.scenario.is_object() || cfg.scenario.is_null()) {
            return Err(config_err("`scenario` must be an object"));
        }
        Ok(cfg)
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("bad key `{key}`")));
    }
    let mut cur = root;
    for part in &parts[..parts.len() - 1] {
        if cur.is_null() {
            *cur = Value::Object(Map::new());
        }
        cur = cur
            .as_object_mut()
            .ok_or_else(|| config_err(format!("`{key}`: `{part}` is not inside an object")))?
            .entry(part.to_string())
            .or_insert(Value::Null);
    }
    if cur.is_null() {
        *cur = Value::Object(Map::new());
    }
    cur.as_object_mut()
        .ok_or_else(|| config_err(format!("`{key}` does not name an object field")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Applies the config file (if any) and then each `key=value` to `scenario`.
pub fn apply_overrides(
    scenario: &Scenario,
    config: Option<&ConfigFile>,
    sets: &[String],
) -> Result<Scenario> {
    let mut value = serde_json::to_value(scenario)?;
    if let Some(cfg) = config {
        merge(&mut value, &cfg.scenario);
    }
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| config_err(format!("expected key=value, got `{s}`")))?;
        set_path(&mut value, k.trim(), parse_value(v.trim()))?;
    }
    serde_json::from_value(value).map_err(|e| config_err(format!("invalid override: {e}")))
}
