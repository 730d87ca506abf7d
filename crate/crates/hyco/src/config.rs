//! TOML run configuration.
//!
//! A config file either names a base preset and overrides some of its
//! fields, or spells out a full `[scenario]` and `[train]`:
//!
//! ```toml
//! preset = "helmholtz_desk"
//! method = "hyco"
//!
//! [train]
//! epochs = 500
//! ghosts = 100
//! ```

use std::path::Path;

use hyco_core::experiments::{preset, Preset};
use hyco_core::hyco::Method;
use toml::{Table, Value};

use crate::CliError;

/// A parsed and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub method: Option<Method>,
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses configuration text, applying it on top of the named base preset
/// when one is given.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let method = match table.remove("method") {
        None => None,
        Some(Value::String(s)) => Some(
            Method::parse(&s).ok_or_else(|| CliError::Config(format!("unknown method `{s}`")))?,
        ),
        Some(_) => return Err(CliError::Config("`method` must be a string".into())),
    };
    let merged = match table.remove("preset") {
        None => table,
        Some(Value::String(name)) => {
            let base = preset(&name).map_err(|e| CliError::Config(e.to_string()))?;
            let mut base = Table::try_from(&base).map_err(|e| CliError::Config(e.to_string()))?;
            merge(&mut base, table);
            base
        }
        Some(_) => return Err(CliError::Config("`preset` must be a string".into())),
    };
    let preset: Preset = merged
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    validate(&preset)?;
    Ok(RunConfig { preset, method })
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn validate(p: &Preset) -> Result<(), CliError> {
    p.scenario
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    p.train
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))
}

/// Fully resolved TOML of a preset, as shipped in `presets/`.
pub fn preset_toml(p: &Preset) -> String {
    toml::to_string(p).expect("presets serialize")
}
