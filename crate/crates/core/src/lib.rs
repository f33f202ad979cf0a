//! Numerical laboratory for the integrable and hyperbolic structure of the
//! 2D incompressible Euler equation on the 2π-periodic torus.
//!
//! The crate is split along the objects it manipulates:
//!
//! * [`lattice`]: wave vectors, the triad interaction coefficient and the
//!   kinetic (Fourier) form of the vorticity equation.
//! * [`spectra`]: the class decomposition of the equation linearized at a
//!   single-mode fixed point, the continuous-spectrum band and the point
//!   spectrum by continued fractions, checked against finite sections.
//! * [`galerkin`]: the four-mode linear and five-mode nonlinear truncations,
//!   their invariants, an RK4/RK45 integrator and the closed-form
//!   stable/unstable manifold orbits.
//! * [`torus`]: pseudospectral fields, Poisson brackets, Lax-pair residuals
//!   and verification of the Darboux transformation.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod galerkin;
pub mod lattice;
pub mod spectra;
pub mod torus;

pub use error::{LabError, Result};
pub use lattice::{Basis, ModeState, WaveVector};
