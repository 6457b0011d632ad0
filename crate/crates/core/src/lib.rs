//! Linear wave propagation on flat two-dimensional cones `C(S¹_ρ)`.

pub mod bessel;
pub mod checks;
pub mod cone;
pub mod error;
pub mod estimates;
pub mod hankel;
pub mod kernel;
pub mod lp;
pub mod quadrature;
pub mod spectral;
pub mod wedge;

pub use cone::{Cone, ConePoint, Region, RegionTag};
pub use error::{ConeError, Result};
