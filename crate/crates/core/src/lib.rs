//! Numerical laboratory for the periodic Benjamin-Ono equation.
//!
//! The crate covers the spectral toolkit on the circle, the truncated
//! Benjamin-Ono flow and its Gibbs ensemble, multi-soliton pole
//! dynamics, the circular log-gas at inverse temperature 2, optimal transport
//! on the circle and the isentropic Euler limit.
//!
//! Fourier convention used throughout: `c_n = (1/2π) ∫ f(x) e^{-inx} dx`, and
//! every integral written `∫ … dx/2π` is the normalised circle average.

pub mod bo;
pub mod error;
pub mod euler;
pub mod gas;
pub mod gibbs;
pub mod ode;
pub mod quad;
pub mod rng;
pub mod soliton;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use spectral::FourierField;
