//! Laurent expansions of linear pencil resolvents at z = 1, spectral
//! separation, Jordan chain subspaces, and Granger-Johansen style
//! representations of ARMA(1,1) unit-root processes.

pub mod arma;
pub mod augment;
pub mod contour;
pub mod corpus;
pub mod demo;
pub mod error;
pub mod io;
pub mod jordan;
pub mod laurent;
pub mod linalg;
pub mod pencil;
pub mod singularity;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use laurent::{BasicSolution, LaurentExpansion};
pub use linalg::{c64, ComplexMatrix, ComplexVector};
pub use pencil::LinearPencil;
pub use singularity::SingularityClass;
pub use spectral::SpectralPair;
pub use tolerances::Tolerances;
