//! Files written by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: String,
    pub content: String,
}

impl Artifact {
    pub fn new(path: impl Into<String>, content: impl Into<String>) -> Self {
        Self { path: path.into(), content: content.into() }
    }

    pub fn json<T: Serialize>(path: impl Into<String>, value: &T) -> Self {
        Self::new(path, to_json(value))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts(pub Vec<Artifact>);

impl Artifacts {
    pub fn push(&mut self, a: Artifact) {
        self.0.push(a);
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.0.iter().find(|a| a.path == path).map(|a| a.content.as_str())
    }

    /// Writes every artifact under `dir` and returns the written paths.
    pub fn write_all(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        self.0.iter().map(|a| write_file(&dir.join(&a.path), &a.content)).collect()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, content: &str) -> CliResult<PathBuf> {
    let err = |source| CliError::Write { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(err)?;
    }
    fs::write(path, content).map_err(err)?;
    Ok(path.to_path_buf())
}

/// `path` as given when absolute, else under `dir`.
pub fn resolve(dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        dir.join(path)
    }
}
