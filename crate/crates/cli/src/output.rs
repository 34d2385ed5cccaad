use std::fmt;

use hcsample::Error;
use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;
pub const EXIT_INTERNAL: u8 = 1;

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: "usage",
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Self {
            kind: "precondition",
            code: EXIT_PRECONDITION,
            message: message.into(),
        }
    }

    pub fn resource(message: impl Into<String>) -> Self {
        Self {
            kind: "resource",
            code: EXIT_RESOURCE,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: "internal",
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind, "exit_code": self.code, "message": self.message },
        })
        .to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::ResourceLimit(_) => Failure::resource(message),
            Error::Precondition(_)
            | Error::InvalidGraph(_)
            | Error::Parse { .. }
            | Error::UnknownStrategy { .. } => Failure::precondition(message),
            Error::Inconsistent(_) | Error::GenerationFailed { .. } => Failure::internal(message),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::precondition(format!("i/o: {e}"))
    }
}

pub type Outcome<T> = Result<T, Failure>;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: String,
    schema_version: u32,
    config: &'a RunConfig,
    result: &'a T,
}

/// Pretty JSON with the command's schema id and the effective configuration.
pub fn json_envelope<T: Serialize>(command: &str, config: &RunConfig, result: &T) -> String {
    let env = Envelope {
        schema: format!("hcsample/{command}/v{SCHEMA_VERSION}"),
        schema_version: SCHEMA_VERSION,
        config,
        result,
    };
    serde_json::to_string_pretty(&env).expect("results serialize")
}

/// Two-column `key value` lines.
pub fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}
