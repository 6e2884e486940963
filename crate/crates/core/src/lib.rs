//! Solar panel irradiance under arbitrary illumination, photodifferential
//! orientation control, and the baselines it is compared against.

#[cfg(feature = "cli")]
pub mod cli;
pub mod controller;
pub mod corpus;
pub mod ephemeris;
pub mod environment;
pub mod error;
pub mod irradiance;
pub mod modes;
pub mod photodiff;
pub mod plot;
pub mod simulate;
pub mod sky;
pub mod sphere;
pub mod strategies;

pub use error::{Error, Result};
