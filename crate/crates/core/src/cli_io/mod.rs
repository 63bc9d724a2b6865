//! Scenario files, run orchestration and result serialisation.

pub mod output;
pub mod runs;
pub mod scenario;

pub use output::{Provenance, SweepRow, LANDMARKS_JSON, TOOL_VERSION};
pub use runs::{
    build_model, build_prior, lambda_from_artifacts, prepare, run_design, run_info, run_info_sweep, run_posterior,
    run_simulate, PosteriorArtifacts, Prepared, ResolvedControls, REFERENCE_R_C,
};
pub use scenario::{PriorChoice, Scenario, SweepSpec, SweepVariable};
