//! ARMA(1,1) processes A₀x(t) + A₁x(t−1) = F₀n(t) + F₁n(t−1) with a unit root.

pub mod coefficients;
pub mod coint;
pub mod difference;
pub mod model;
pub mod noise;
pub mod represent;

pub use model::{ArmaModel, ModelSpec};
pub use noise::{simulate_noise, NoiseKind, NoiseSpec, Trajectory};
pub use represent::{represent, Form, RepresentOptions, RepresentationReport};
