//! Batch experiments over the rigid-psido library: scenario configuration,
//! trajectory runs, parameter sweeps and invariant verification suites.

#![forbid(unsafe_code)]

pub mod config;
pub mod run;
pub mod snapshot;
pub mod verify;

pub use config::{parse_config, InitialSpec, ScenarioConfig, ScenarioKind, Violation};
pub use run::{run_scenario, sweep, trace_table, RunOptions, RunOutcome, SweepEntry};
pub use verify::{run_suite, Check, Report, Suite};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Config(Vec<Violation>),
    #[error(transparent)]
    Core(#[from] rigid_psido::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("{0}")]
    Usage(String),
}

impl LabError {
    /// Process exit status: 2 for usage and configuration errors, 3 for
    /// certification and overflow refusals, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Usage(_) => 2,
            Self::Core(rigid_psido::Error::NotCertified(_) | rigid_psido::Error::Overflow { .. }) => 3,
            _ => 1,
        }
    }
}
