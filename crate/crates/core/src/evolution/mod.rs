//! Threshold and scaling-parameter estimation.
//!
//! The threshold comes from density evolution; every other parameter is
//! measured on Monte-Carlo peeling runs.

pub mod de;
pub mod extract;
pub mod nu_theta;
pub mod table;
pub mod trajectory;

pub use de::{de_threshold, uncoupled_decoded_fraction, uncoupled_threshold};
pub use extract::{estimate_speed, extract_alpha_beta_gamma, PlateauConfig, SteadyState};
pub use nu_theta::{estimate_fluctuations, estimate_nu_theta, NuTheta, NuThetaConfig};
pub use table::{
    build_scaling_params, estimate_point, Estimate, EstimateConfig, PointEstimate, ScalingParams, ScalingRow,
    Sensitivity,
};
pub use trajectory::{estimate_mean_trajectory, MeanTrajectory, TrajectoryConfig};
