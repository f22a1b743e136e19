use serde_json::json;
use sphere_scatter::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_MONTE_CARLO: i32 = 4;
pub const EXIT_IO: i32 = 1;

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub field: Option<String>,
    pub message: String,
}

impl Failure {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            kind: "config",
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    pub fn monte_carlo(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_MONTE_CARLO,
            kind: "monte_carlo",
            field: None,
            message: message.into(),
        }
    }

    /// One JSON line for stderr.
    pub fn to_json(&self) -> String {
        json!({
            "error": self.kind,
            "field": self.field,
            "message": self.message,
            "exit_code": self.code,
        })
        .to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Domain { what, .. } => Failure::config(what, message),
            Error::InvalidParameter { name, .. } => Failure::config(name, message),
            Error::DimensionMismatch { .. } => Failure::config("p", message),
            Error::NonConvergence { .. } | Error::NonPositiveDensity { .. } => Failure {
                code: EXIT_NUMERIC,
                kind: "numerical",
                field: None,
                message,
            },
            Error::NotPositiveSemidefinite { .. } => Failure::monte_carlo(message),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_IO,
            kind: "io",
            field: None,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: EXIT_IO,
            kind: "io",
            field: None,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;
