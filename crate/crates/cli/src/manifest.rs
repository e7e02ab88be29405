//! Run manifests: the resolved command serialized as JSON, so a run can be
//! reproduced exactly later.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::Command;

#[derive(Deserialize)]
pub struct RunManifest {
    pub command: Command,
}

pub fn store(path: &Path, command: &Command) -> Result<(), String> {
    #[derive(Serialize)]
    struct ManifestRef<'a> {
        command: &'a Command,
    }
    let json = serde_json::to_string_pretty(&ManifestRef { command }).map_err(|e| e.to_string())?;
    crate::output::write_file(path, &(json + "\n")).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load(path: &Path) -> Result<RunManifest, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}
