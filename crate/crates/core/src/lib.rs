//! Ground-state cooling of a trapped two-level atom coupled to a lossy
//! optical cavity and driven by a laser.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, geometry and the spontaneous-emission pattern;
//! * [`analytic`]: closed-form heating/cooling rates and limiting cases;
//! * [`dynamics`]: the phonon rate equation;
//! * [`liouvillian`]: numerical force spectrum and diffusion from the
//!   internal (atom + cavity) master equation;
//! * [`mcwf`]: quantum trajectories of atom, cavity and motion.

pub mod analytic;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod liouvillian;
pub mod mcwf;
pub mod model;
pub mod scan;
pub mod validation;

pub use error::{Error, Result};
pub use model::{derive_geometry, Drive, EmissionPattern, Geometry, SystemParams, NU};

pub type C64 = nalgebra::Complex<f64>;
