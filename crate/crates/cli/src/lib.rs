// Copyright 2026 cdcluster Contributors
// SPDX-License-Identifier: Apache-2.0

//! Front end for `cdcluster`: configuration, subcommands and result files.

use std::path::{Path, PathBuf};

pub mod commands;
pub mod config;
pub mod output;

pub use config::{ModeSelect, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Core(#[from] cdcluster::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for anything the user can fix in the config, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}
