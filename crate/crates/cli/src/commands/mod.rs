//! One module per subcommand, plus shared file helpers.

use std::fs;
use std::path::Path;

use anyhow::Context;
use bioprep_core::manifest::{read_manifest, KeyMode};
use bioprep_core::taxonomy::load_backbone;
use bioprep_core::{ClipRecord, TaxonomyTable};
use serde::Serialize;

use crate::RunConfig;

pub mod augment;
pub mod evaluate;
pub mod generate;
pub mod holdout;
pub mod synth;
pub mod taxonomy;
pub mod validate;
pub mod window;

pub(crate) fn key_mode(cfg: &RunConfig) -> KeyMode {
    if cfg.strict {
        KeyMode::Strict
    } else {
        KeyMode::Permissive
    }
}

pub(crate) fn load_table(path: &Path) -> anyhow::Result<TaxonomyTable> {
    load_backbone(path).with_context(|| format!("taxonomy {}", path.display()))
}

pub(crate) fn load_clips(path: &Path, cfg: &RunConfig, table: Option<&TaxonomyTable>) -> anyhow::Result<Vec<ClipRecord>> {
    read_manifest(path, key_mode(cfg), table).with_context(|| format!("manifest {}", path.display()))
}

/// Writes `contents`, creating parent directories.
pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
