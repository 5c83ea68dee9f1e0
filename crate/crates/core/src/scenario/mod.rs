//! Configuration, reports and the solve/simulate/verify/sweep workflows
//! behind the command-line tool.

mod config;
mod report;
mod simulate;
mod sweep;
mod verify;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::market::MarketError;

pub use config::{
    load_config, load_config_file, ExplicitInit, InitKind, InitialCondition, ScenarioConfig, SimConfig, DEFAULT_H,
    DEFAULT_RECORD_STRIDE, DEFAULT_SEED, DEFAULT_T_END,
};
pub use report::{run_solve, EquilibriumReport, RESIDUAL_TOL};
pub use simulate::{csv_header, run_simulate, write_trajectory_csv, SimulationSummary, CONVERGENCE_TOL};
pub use sweep::{run_sweep, write_sweep_csv, SweepRow};
pub use verify::{random_instance, run_verify, CheckResult, VerifyOptions, VerifyReport};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    MissingField(String),
    #[error("invalid market: {0}")]
    Market(#[from] MarketError),
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
}

impl ScenarioError {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        let message = err.to_string();
        if message.starts_with("missing field") {
            ScenarioError::MissingField(message)
        } else {
            ScenarioError::Parse {
                line: err.line(),
                column: err.column(),
                message,
            }
        }
    }

    /// Process exit code: 2 for input errors, 3 for numerical divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Dynamics(DynamicsError::NonfiniteState { .. }) => 3,
            _ => 2,
        }
    }
}

/// Pretty JSON with object keys in lexicographic order.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered by key
    let value = serde_json::to_value(value).expect("report types serialize to JSON");
    let mut out = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    out.push('\n');
    out
}
