use serde::Serialize;
use serde_json::Value;

/// Exit status of the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const NON_CONVERGENCE: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Value>,
}

impl CliError {
    pub fn new(code: i32, kind: &str, message: impl Into<String>) -> CliError {
        CliError { error: kind.to_string(), message: message.into(), exit_code: code, diagnostics: None }
    }

    pub fn validation(kind: &str, message: impl Into<String>) -> CliError {
        CliError::new(exit::VALIDATION, kind, message)
    }

    pub fn internal(kind: &str, message: impl Into<String>) -> CliError {
        CliError::new(exit::INTERNAL, kind, message)
    }

    pub fn with_diagnostics(mut self, d: Value) -> CliError {
        self.diagnostics = Some(d);
        self
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

impl From<scare_core::Error> for CliError {
    fn from(e: scare_core::Error) -> CliError {
        let code = if e.is_validation() {
            exit::VALIDATION
        } else if e.is_non_convergence() {
            exit::NON_CONVERGENCE
        } else {
            exit::INTERNAL
        };
        CliError::new(code, e.kind(), e.to_string())
    }
}
