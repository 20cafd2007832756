//! Numerical building blocks shared by the kernel, moment and solver modules.

pub mod finite_diff;
pub mod gauss_kronrod;
pub mod gauss_legendre;
pub mod ode;
pub mod spectral;
pub mod summation;

pub use gauss_kronrod::{integrate, integrate_panels, QuadResult};
pub use summation::CompensatedSum;
