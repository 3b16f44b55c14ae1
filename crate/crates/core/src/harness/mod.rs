//! Reproduction harness: test functions, sampling plans, experiment runs and
//! their output files.

pub mod config;
pub mod experiment;
pub mod output;
pub mod plan;
pub mod testfun;

pub use config::{ExperimentConfig, ManifoldId, Method, PlanType, TestFunctionId};
pub use experiment::{
    fd_derivative_check, run_experiment, ErrorReport, ExperimentFailure, FdCheck,
};
