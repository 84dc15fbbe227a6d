use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    ConfigRead {
        path: String,
        source: std::io::Error,
    },

    #[error("cannot parse config: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("bad config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] radshoot_core::Error),

    #[error("oracle tolerance exceeded: max relative error {0:e}")]
    OracleMismatch(f64),

    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for config problems, 3 for rejected inputs, 4 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigRead { .. } | CliError::ConfigParse(_) | CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numeric() => 4,
            CliError::Core(_) => 3,
            CliError::OracleMismatch(_) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use radshoot_core::Error as E;
        match self {
            CliError::ConfigRead { .. } => "config_read",
            CliError::ConfigParse(_) => "config_parse",
            CliError::Config(_) => "config",
            CliError::Core(E::Validation { .. }) => "validation",
            CliError::Core(E::HypothesisGate(_)) => "hypothesis_gate",
            CliError::Core(E::InvalidSpec(_)) => "invalid_spec",
            CliError::Core(E::InvalidArgument(_)) => "invalid_argument",
            CliError::Core(_) => "numeric",
            CliError::OracleMismatch(_) => "oracle_mismatch",
            CliError::Io(_) | CliError::Csv(_) => "io",
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Core(radshoot_core::Error::Validation { clause, .. }) = self {
            v["clause"] = json!(clause);
        }
        v
    }
}
