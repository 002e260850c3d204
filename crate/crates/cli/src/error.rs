// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use ringcirc::algebra::AlgebraError;
use ringcirc::circuit::CircuitError;
use ringcirc::compile::CompileError;
use ringcirc::frontend::FrontendError;
use ringcirc::logic::LogicError;
use ringcirc::numeric::NumericError;
use ringcirc::simulate::SimulateError;

/// A failure reported as `{"error": {"kind", "message"}}`.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl Into<String>) -> CliError {
        CliError {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: String) -> CliError {
        CliError::new("usage", message)
    }

    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::new("io", format!("{}: {e}", path.display()))
    }

    pub fn print(&self) {
        let v = serde_json::json!({"error": {"kind": self.kind, "message": self.message}});
        eprintln!("{v}");
    }
}

macro_rules! kind {
    ($t:ty, $k:literal) => {
        impl From<$t> for CliError {
            fn from(e: $t) -> CliError {
                CliError::new($k, e.to_string())
            }
        }
    };
}

kind!(AlgebraError, "algebra");
kind!(CircuitError, "circuit");
kind!(LogicError, "logic");
kind!(CompileError, "compile");
kind!(SimulateError, "simulate");
kind!(NumericError, "numeric");

impl From<FrontendError> for CliError {
    fn from(e: FrontendError) -> CliError {
        let kind = match &e {
            FrontendError::Parse(_) => "syntax",
            FrontendError::Json(_) => "json",
            FrontendError::Logic(_) => "logic",
            FrontendError::Algebra(_) => "algebra",
            FrontendError::Invalid(_) => "invalid",
        };
        CliError::new(kind, e.to_string())
    }
}
