use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A parser message anchored to a byte range of the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub start: usize,
    pub end: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(start: usize, end: usize, message: impl Into<String>) -> Self {
        Self { start, end, message: message.into(), severity: Severity::Error }
    }

    pub fn warning(start: usize, end: usize, message: impl Into<String>) -> Self {
        Self { start, end, message: message.into(), severity: Severity::Warning }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} at {}..{}: {}", self.start, self.end, self.message)
    }
}
