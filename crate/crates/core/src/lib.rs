//! Multibody dynamics of a four-winged flapping flyer.
//!
//! The configuration is the body position and attitude plus four wing
//! attitudes, `ℝ³ × SO(3)⁵`. The generalized velocity `ξ ∈ ℝ¹⁸` stacks the
//! inertial body velocity `ṗ`, the body angular velocity `Ω_B` and the four
//! wing angular velocities `Ω₁..Ω₄`, each in its own frame.
//!
//! Gravity acts along `+e₃` (the inertial frame points down).

pub mod aero;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod kinematics;
pub mod morphology;
pub mod optimize;
pub mod reduced;
pub mod sampling;
pub mod so3;
pub mod validation;
pub mod wing_geometry;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
