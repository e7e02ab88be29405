//! Microarchitecture presets: plain-text `name = policy` files mapping cache
//! identifiers to policy names, with the published results bundled in.

use thiserror::Error;

use super::names::{parse_policy_name, PolicyNameError};
use super::PolicySpec;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub policy: PolicySpec,
}

#[derive(Debug, Error, PartialEq)]
pub enum PresetError {
    #[error("line {line}: expected `name = policy`")]
    MissingEquals { line: usize },
    #[error("line {line}: empty preset name")]
    EmptyName { line: usize },
    #[error("line {line}: {source}")]
    BadPolicy {
        line: usize,
        source: PolicyNameError,
    },
    #[error("line {line}: duplicate preset {name:?}")]
    Duplicate { line: usize, name: String },
}

/// Parse a preset file: one `name = policy` per line, `#` comments and blank
/// lines ignored.
pub fn parse_presets(text: &str) -> Result<Vec<Preset>, PresetError> {
    let mut presets: Vec<Preset> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (name, policy) = content
            .split_once('=')
            .ok_or(PresetError::MissingEquals { line })?;
        let name = name.trim();
        if name.is_empty() {
            return Err(PresetError::EmptyName { line });
        }
        if presets.iter().any(|p| p.name == name) {
            return Err(PresetError::Duplicate {
                line,
                name: name.to_owned(),
            });
        }
        let policy =
            parse_policy_name(policy.trim()).map_err(|source| PresetError::BadPolicy { line, source })?;
        presets.push(Preset {
            name: name.to_owned(),
            policy,
        });
    }
    Ok(presets)
}

pub const BUILTIN_PRESETS_TEXT: &str = include_str!("../../data/presets.txt");

/// The bundled microarchitecture presets.
pub fn builtin_presets() -> Vec<Preset> {
    parse_presets(BUILTIN_PRESETS_TEXT).expect("bundled preset file parses")
}

pub fn lookup(presets: &[Preset], name: &str) -> Option<PolicySpec> {
    presets.iter().find(|p| p.name == name).map(|p| p.policy.clone())
}
