//! Random number generation and the samplers used by the Gibbs sweep.

mod normal;
mod rng;
mod samplers;
mod skew_t;
mod smoother;
mod truncnorm;

pub use normal::{norm_cdf, norm_pdf, norm_quantile, norm_sf};
pub use rng::{DgfcRng, RngStream};
pub use samplers::{
    sample_gamma, sample_inverse_wishart, sample_mniw, sample_multivariate_normal, sample_mvn_chol,
    sample_wishart, standard_normal, standard_normal_matrix, standard_normal_vector,
};
pub use skew_t::{sample_skew_t, skew_t_cdf, skew_t_quantile, SkewT};
pub use smoother::{kalman_simulation_smoother, kalman_smoothed_mean, StateSpaceSpec};
pub use truncnorm::{sample_truncated_normal, truncated_normal_mean};
