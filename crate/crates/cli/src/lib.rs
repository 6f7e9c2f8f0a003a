//! Driver for building degree-4 Γ₀ surfaces, analyzing their elliptic
//! fibrations and reproducing the bundled invariant tables.

pub mod fixtures;
pub mod pipeline;
pub mod reproduce;

use shtuka_core::FieldError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("{0}")]
    Io(String),
    #[error("{stage} stage: {message}{}", hint.as_ref().map(|h| format!(" ({h})")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        message: String,
        hint: Option<String>,
    },
    #[error("{0}")]
    Field(#[from] FieldError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}
