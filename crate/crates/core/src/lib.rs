//! Simulation and Bayesian inference for near-field Talbot interferometry
//! of levitated nanospheres under collapse-model decoherence.

pub mod bayes;
pub mod cli_io;
pub mod constants;
pub mod decoherence;
pub mod design;
pub mod error;
pub mod information;
pub mod physics;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
