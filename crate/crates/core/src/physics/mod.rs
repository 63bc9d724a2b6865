//! Interferometer geometry, grating interaction and the Talbot interference pattern.

pub mod config;
pub mod geometry;
pub mod grating;
pub mod mie;
pub mod particle;
pub mod pattern;
pub mod talbot;

pub use config::{ExperimentConfig, FlightTime, GratingPulse, OpticalModel};
pub use geometry::{derive_geometry, geometry_scales, DerivedGeometry};
pub use grating::{grating_mask_terms, grating_pulse, GratingInteraction, MaskTerms, OpticalResponse};
pub use mie::{mie_amplitudes, MieCoefficients};
pub use particle::{Particle, Permittivity};
pub use pattern::{pattern_density, window_grid, FringePattern};
pub use talbot::{
    fringe_amplitudes, phase_mask_fourier, talbot_coefficient, talbot_coefficient_continued, TalbotSpectrum,
};
