//! Configuration-driven experiments: truth generation, inversion, artifacts.

mod config;
mod expr;
mod oracle;
mod plot;
mod run;

pub use config::{validate_config, ConfigError, ExperimentConfig, GridSpec, StepRule};
pub use expr::eval as eval_expr;
pub use oracle::{compare_flux, oracle_compare, uniform_angles, FluxComparison, OracleReport};
pub use plot::emit_plots;
pub use run::{
    mean_shape, run_experiment, simulate, simulate_fixed, stopped_by_reversal, stream_rng, truth_history,
    write_artifacts, ExperimentError, ExperimentOutcome, Inversion, RunArtifacts, RunSummary, WindowPosterior,
    WindowReport, SAMPLER_STREAM, TRUTH_STREAM,
};
