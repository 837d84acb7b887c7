//! Closed-form and mean-field results.

mod critical;
mod meanfield;
mod shells;

pub use critical::{critical_degree_1, critical_degree_2, k2_closed_form, CriticalDegrees};
pub use meanfield::{
    failures_dist_mf, failures_dist_with_q, is_subcritical, mean_failures_mf, poisson_failures, q_subcritical, q_values,
    scalefree_tail, FailureDistribution, FailureSource,
};
pub use shells::{cayley_step_prediction, solve_cayley_shells, ShellSolution};
