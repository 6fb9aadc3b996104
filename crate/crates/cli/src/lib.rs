//! Configuration, CSV formats and command dispatch for `radial-sbp`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod formats;

use std::path::PathBuf;

pub use commands::{dispatch, Outcome};
pub use config::{build, merge, parse_text, Command, MethodArg, Phase, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("expected key=value, found `{0}`")]
    Malformed(String),
    #[error("invalid value `{value}` for `{key}`")]
    InvalidValue { key: String, value: String },
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("inconsistent combination: {0}")]
    InconsistentCombination(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error(transparent)]
    Core(#[from] radial_sbp::Error),
}
