use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use training::TrainConfig;

/// Provenance record written beside every command's outputs so a run can
/// be reproduced from the artifact directory alone.
#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    config_sha256: String,
    tool_version: &'a str,
    formats: Formats,
}

/// On-disk format versions of the artifacts this tool reads and writes.
#[derive(Serialize)]
struct Formats {
    checkpoint: u32,
    dataset: u32,
    scene: u32,
}

/// Hash of the resolved configuration (canonical field order), so two
/// runs compare equal even when their config files differ in formatting.
pub fn config_digest(cfg: &TrainConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_manifest(
    dir: &Path,
    command: &str,
    cfg: &TrainConfig,
    seed: u64,
) -> std::io::Result<PathBuf> {
    let manifest = Manifest {
        command,
        seed,
        config_sha256: config_digest(cfg),
        tool_version: env!("CARGO_PKG_VERSION"),
        formats: Formats { checkpoint: 1, dataset: 1, scene: 1 },
    };
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{command}_manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}
