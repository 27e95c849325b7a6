//! Semiclassical four-mode model of a Bose-Einstein condensate in a symmetric
//! double well.

pub mod cache;
pub mod dynamics;
pub mod eigensolver;
pub mod fixed_points;
pub mod model;
pub mod ode;
pub mod output;
pub mod params;
pub mod regime_map;

pub use params::{CoefficientIntegrals, ModelParams};
