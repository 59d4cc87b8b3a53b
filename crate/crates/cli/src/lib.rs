//! Pipeline driver behind the `egonav` binary: synthesize recordings,
//! segment phases, retarget navigation, simulate the commands and report.

pub mod commands;
pub mod config;
mod svg;

use std::fmt;

pub use commands::{cmd_chunk, cmd_report, cmd_retarget, cmd_segment, cmd_simulate, cmd_synth, Context};
pub use config::PipelineConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_ZONES: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// A failed command: process exit code plus a message for standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<egonav::Error> for Failure {
    fn from(e: egonav::Error) -> Self {
        let code = match e.root() {
            egonav::Error::NoManipulationZones => EXIT_NO_ZONES,
            egonav::Error::NumericalFailure { .. } => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Ordered key/value summary printed after a command succeeds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary(pub Vec<(String, serde_json::Value)>);

impl Summary {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<serde_json::Value>) {
        self.0.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&serde_json::Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self
                .0
                .iter()
                .map(|(k, v)| match v {
                    serde_json::Value::String(s) => format!("{k} = {s}\n"),
                    other => format!("{k} = {other}\n"),
                })
                .collect(),
            Format::Json => {
                let map: serde_json::Map<String, serde_json::Value> = self.0.iter().cloned().collect();
                let mut s = serde_json::to_string_pretty(&map).expect("summary is plain JSON");
                s.push('\n');
                s
            }
        }
    }
}
