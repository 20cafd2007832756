//! Polyharmonic heat kernels and the Cauchy problem for `u_t + (-Δ)^m u = 0`.
//!
//! The solution of the Cauchy problem is the convolution of the datum with a
//! self-similar kernel
//!
//! ```text
//! K(t, x) = α_{m,n} t^{-n/2m} f_{m,n}(|x| / t^{1/2m}),
//! f_{m,n}(η) = η^{1-n} ∫_0^∞ e^{-s^{2m}} (ηs)^{n/2} J_{(n-2)/2}(ηs) ds.
//! ```
//!
//! For `m ≥ 2` the radial profile `f_{m,n}` oscillates and changes sign
//! infinitely often, which is the source of every phenomenon this crate
//! measures: signed moments, a non self-adjoint Fokker–Planck operator, and
//! solutions that lose positivity before becoming eventually positive on
//! compact sets.
//!
//! The crate is organised by subsystem:
//!
//! * [`kernels`] evaluates `f_{m,n}` (power series, Bessel quadrature,
//!   steepest-descent contour, leading asymptotics), checks its recurrence and
//!   ODE, and locates its zeros.
//! * [`moments`] computes moments of the stationary profile `v_∞`, classifies
//!   their signs, and builds closed-form moment trajectories.
//! * [`fokker_planck`] maps between the parabolic and self-similar frames and
//!   applies `L v = (-Δ)^m v - ∇·(y v)` spectrally.
//! * [`cauchy`] solves the Cauchy problem on a periodic box and runs the
//!   positivity and decay experiments.
//! * [`bounds`] holds the sharp decay constant `σ_m`, dual norms of
//!   constant-coefficient symbols and envelope fits.
//!
//! ```
//! use polyheat::kernels::{self, KernelSpec};
//!
//! let spec = KernelSpec::new(2, 1).unwrap();
//! let f0 = kernels::eval_series(&spec, 0.0).unwrap();
//! assert!((f0 - 0.723_204_542_316_038_6).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod cauchy;
mod error;
pub mod fokker_planck;
pub mod kernels;
pub mod moments;
pub mod numerics;

pub use error::{Error, Result};

/// The chapters of the guide in `book/`, compiled and run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/moments.md")]
    mod moments {}
    #[doc = include_str!("../../../book/src/fokker_planck.md")]
    mod fokker_planck {}
    #[doc = include_str!("../../../book/src/cauchy.md")]
    mod cauchy {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
