//! Pulsating fronts of periodic bistable reaction-diffusion equations:
//! principal eigenvalues, homogenization, averaged 1-d dynamics and
//! wave-coordinate speed solvers.

pub mod discretize;
pub mod homogenize;
mod error;
pub mod media;
pub mod pulsate;
pub mod spectral;
pub mod terrace;

pub use error::{Error, Result};
