//! Numerical and symbolic toolkit for the derivative nonlinear Schrödinger
//! equation `i u_t + u_xx = -i (|u|^2 u)_x`.
//!
//! * [`diffpoly`]: exact differential polynomials and Euler operators.
//! * [`resolvent`]: recursive resolvent symbols and their structure checks.
//! * [`hierarchy`]: the conserved functionals `E_j` via residue extraction.
//! * [`scattering`]: the transmission coefficient `a_u` by Jost integration
//!   and by perturbation determinants / trace series.
//! * [`evolve`]: integrating-factor RK4 evolution with conservation monitors.
//! * [`sobolev`]: the functionals `phi_L`, their quadratic parts and the
//!   comparison with homogeneous Sobolev seminorms.

pub mod coeff;
pub mod diffpoly;
pub mod error;
pub mod evolve;
pub mod fft;
pub mod grid;
pub mod hierarchy;
pub mod linalg;
pub mod profiles;
pub mod quad;
pub mod resolvent;
pub mod scattering;
pub mod sobolev;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use grid::GridFunction;

pub type C64 = num_complex::Complex<f64>;
