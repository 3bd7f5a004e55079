//! Experiment orchestration: configuration, the noiseless study, the SNR
//! sweep, result persistence, the ℓ0-oracle study and the CLI.

mod cli;
mod config;
mod experiment;
mod oracle;

pub use cli::{cli_main, InstanceMeta};
pub use config::{ExperimentConfig, RhoRule};
pub use experiment::{
    cell_id, cell_seed, generate_instance, read_records, run_experiment, run_id, run_noiseless_study,
    run_snr_sweep, solve_instance, vector_paths, CellTruth, ExperimentOutput, Instance, OutputFormat,
    ResultRecord, SolverRun, SummaryRow, RECORD_COLUMNS,
};
pub use oracle::{run_oracle_study, support_of, OracleCase, OracleConfig, OracleReport, SUPPORT_TOL};
