//! Parameter sweeps, exceptional-point detection and finite-size scaling.

mod detect;
mod scaling;
mod sweep;

pub use detect::{detect_eps, EpCandidate, EpReport, BRACKET_TOL, DEFAULT_THRESHOLD, MEDIAN_ESCALATION};
pub use scaling::{scaling_run, ScalingFit, ScalingPoint};
pub use sweep::{
    linear_grid, run_sweep, ssh_block_rigidity, ssh_density_curve, validate_grid, ModelSpec, Sample, SampleStatus,
    SusceptibilityCurve, SweepSpec, Tracking,
};
