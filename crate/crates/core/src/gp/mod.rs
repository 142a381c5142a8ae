//! Gaussian-process regression with a constant trend.

mod kernel;
mod likelihood;
mod model;
mod posterior;

pub use kernel::{kernel_eval, scaled_distance, KernelFamily, KernelSpec};
pub use likelihood::{concentrated_core, concentrated_loglik, correlation_matrix, Concentrated};
pub use model::{fit_gp, input_ranges, BoundKernel, FitOptions, GpModel};
pub(crate) use model::{is_constant, log_theta_starts};
pub use posterior::{Covariance, Posterior, Prediction, PredictionGradient};
