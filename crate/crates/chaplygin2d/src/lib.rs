//! Radially symmetric compressible-Euler laboratory for Chaplygin and
//! polytropic gases.
//!
//! The library integrates the full Euler system in primitive variables
//! (rho, U, S) on a cell-centered radial grid, side by side with the
//! quasilinear potential equation whose solution serves as the reference
//! flow, and measures the quantities that separate the two gases:
//!
//! - null-condition residuals of the potential-equation coefficient tensors
//!   (exactly, through Fourier coefficients of the symbol on the wave cone);
//! - weighted vector-field energies E_n, Q_n, the cutoff interior variants,
//!   and the ghost-weighted exterior energy;
//! - decay exponents of the perturbation fields near and inside the light
//!   cone, entropy support radii, Hardy-quotient ratios, and the space-time
//!   integral of the good derivative;
//! - lifespans of polytropic runs via gradient blow-up detection, contrasted
//!   with Chaplygin runs that stay smooth.
//!
//! See the `examples/` directory for one runnable program per capability and
//! the `chaplygin2d` binary for the batch CLI (`run`, `sweep`, `nullcheck`,
//! `converge`).

pub mod diagnostics;
pub mod eos;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod nullcheck;
pub mod potential;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
