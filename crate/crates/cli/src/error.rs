use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration at `{field}`: {message}")]
    ConfigInvalid { field: String, message: String },
    #[error("unknown code `{0}`")]
    UnknownCode(String),
    #[error("this command needs two named codes")]
    NeedTwoCodes,
    #[error("cannot read {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },
    #[error("oracle deviation above 1e-8 for: {}", .0.join(", "))]
    OracleDeviation(Vec<String>),
    #[error(transparent)]
    Core(#[from] dqb_core::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::ConfigInvalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        use dqb_core::Error as E;
        match self {
            CliError::ConfigInvalid { .. } => "config_invalid",
            CliError::UnknownCode(_) => "unknown_code",
            CliError::NeedTwoCodes => "need_two_codes",
            CliError::Read { .. } => "read_failed",
            CliError::Write { .. } => "write_failed",
            CliError::OracleDeviation(_) => "oracle_deviation",
            CliError::Core(e) => match e {
                E::EmptyGrid => "empty_grid",
                E::NonPositiveGamma(_) => "non_positive_gamma",
                E::NegativeOmega(_) => "negative_omega",
                E::NonPositiveEnergy(_) => "non_positive_energy",
                E::NonFinite(_) => "non_finite",
                E::LengthMismatch { .. } => "length_mismatch",
                E::NegativeOccupation(_) => "negative_occupation",
                E::GridMismatch => "grid_mismatch",
                E::IndexOutOfRange { .. } => "index_out_of_range",
                E::InvalidTime(_) => "invalid_time",
                E::ZeroSqueeze => "zero_squeeze",
                E::TruncationTooSmall { .. } => "truncation_too_small",
                E::NonFiniteAmplitude => "non_finite_amplitude",
                E::UnknownObservable(_) => "unknown_observable",
                E::UnorderedTimes => "unordered_times",
                E::InsufficientSamples { .. } => "insufficient_samples",
                E::WindowContainsZeroCrossing => "window_contains_zero_crossing",
                E::BadThreshold(_) => "bad_threshold",
                E::InvalidParams(_) => "invalid_params",
                E::InvalidStep => "invalid_step",
                E::Overdamped => "overdamped",
                E::NonFiniteState { .. } => "non_finite_state",
            },
        }
    }

    /// 2 for anything the user can fix in the config, 1 for failures during
    /// the computation itself.
    pub fn exit_code(&self) -> i32 {
        use dqb_core::Error as E;
        match self {
            CliError::ConfigInvalid { .. }
            | CliError::UnknownCode(_)
            | CliError::NeedTwoCodes
            | CliError::Read { .. } => 2,
            CliError::Write { .. } | CliError::OracleDeviation(_) => 1,
            CliError::Core(e) => match e {
                E::EmptyGrid
                | E::NonPositiveGamma(_)
                | E::NegativeOmega(_)
                | E::NonPositiveEnergy(_)
                | E::NonFinite(_)
                | E::LengthMismatch { .. }
                | E::NegativeOccupation(_)
                | E::GridMismatch
                | E::IndexOutOfRange { .. }
                | E::InvalidTime(_)
                | E::UnknownObservable(_)
                | E::UnorderedTimes
                | E::BadThreshold(_)
                | E::InvalidParams(_)
                | E::InvalidStep => 2,
                _ => 1,
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::ConfigInvalid { field, .. } = self {
            obj["field"] = json!(field);
        }
        obj
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
