use phase_qubit::fitting::{DataError, FitError};
use phase_qubit::paramfile::ParamFileError;
use phase_qubit::{ParamError, PropagationError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    ParamFile(#[from] ParamFileError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<Vec<SeedRecord<'a>>>,
}

#[derive(Serialize)]
struct SeedRecord<'a> {
    seed: &'a [f64],
    converged: bool,
    residual_norm: Option<f64>,
    iterations: usize,
    message: Option<&'a str>,
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Usage(_) | CliError::ParamFile(_) => "parse",
            CliError::Data(_) => "data",
            CliError::Params(ParamError::ExceptionalPoint) => "model",
            CliError::Params(_) => "parse",
            CliError::Fit(FitError::InvalidProblem(_)) => "data",
            CliError::Fit(_) => "fit",
            CliError::Propagation(_) => "model",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "io" => 3,
            "parse" | "data" => 4,
            "fit" => 5,
            _ => 6,
        }
    }

    /// One-line JSON error record.
    pub fn to_json(&self) -> String {
        let seeds = match self {
            CliError::Fit(FitError::NoConvergence(d)) => Some(
                d.iter()
                    .map(|s| SeedRecord {
                        seed: &s.seed,
                        converged: s.converged,
                        residual_norm: s.residual_norm,
                        iterations: s.iterations,
                        message: s.message.as_deref(),
                    })
                    .collect(),
            ),
            _ => None,
        };
        let record = ErrorRecord {
            error: ErrorBody {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
                seeds,
            },
        };
        serde_json::to_string(&record).expect("error record serializes")
    }
}
