//! Likelihoods, priors and posteriors over the CSL parameter plane.

pub mod exclusion;
pub mod grid;
pub mod likelihood;
pub mod model;
pub mod posterior;
pub mod prior;

pub use exclusion::{exclusion_line, lambda_at_rc, ExclusionCurve, StrengthLine};
pub use grid::{GridSpec, ThetaGrid};
pub use likelihood::{sample_positions, stream_rng, LikelihoodTable};
pub use model::{DataCoefficients, GridModel, Interferometer, InterferometerModel, TabulatedModel};
pub use posterior::{posterior, posterior_from_log_likelihood, PosteriorGrid};
pub use prior::{experimental_prior, mdip_prior, ExclusionBoundary, Prior};
