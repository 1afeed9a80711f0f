//! Config-driven experiment runs behind the `netcap` command line.

pub mod config;
pub mod run;
pub mod verify;

pub use config::{parse_config, serialize_config, ExperimentConfig, FamilySpec, InputSpec, Mode};
pub use run::{run, run_bounds, run_dist_check, run_mi_sweep, run_simulate, ExitStatus, RunOutput, SWEEP_HEADER};
pub use verify::{run_verify, verification_checks, Check};
