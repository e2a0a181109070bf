//! Error estimators, slope fits and density estimation.
//!
//! All reductions use fixed-order pairwise summation, so results do not
//! depend on how work was split across threads.

mod errors;
mod kde;
mod summation;

pub use errors::{
    fit_loglog_slope, pde_weak_error, strong_error_p, torus_distance, weak_error_phi, ErrorPoint, ErrorReport,
    Estimate, LogLogFit, WeakEstimate,
};
pub use kde::{density_distance, kde_2d, Bandwidth, Density2DEstimate, Norm};
pub use summation::{mean_and_se, pairwise_sum};
