//! Numerical construction of smooth self-similar collapse profiles for the
//! isentropic Euler-Poisson system with polytropic index `1 < γ < 6/5`.
//!
//! The pieces compose bottom-up. [`params`] and [`system`] hold the
//! constants and the ODE. [`sonic`] and [`series`] handle the singular
//! points. [`integrate`] steps through the regular regions and [`shoot`]
//! enumerates solutions. [`laneemden`] and [`linear`] provide the interior
//! and exterior reference solutions the profiles are compared against.

pub mod error;
pub mod fit;
pub mod integrate;
pub mod laneemden;
pub mod linear;
pub mod params;
pub mod registry;
pub mod series;
pub mod shoot;
pub mod sonic;
pub mod system;
pub mod verify;

pub use error::{Error, Result};
pub use params::GammaParams;
