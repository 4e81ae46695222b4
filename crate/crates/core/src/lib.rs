//! Spectral toolkit for the Benjamin-Ono equation on the torus.
//!
//! Fields are stored by Fourier coefficients ([`fourier`]). The Lax operator
//! is truncated to a dense Hermitian matrix ([`lax`]) whose eigenpairs feed
//! the Birkhoff coordinates ([`birkhoff`]). The gauge transform and the
//! Hankel/Toeplitz operator family live in [`gauge`], a pseudo-spectral time
//! stepper in [`solver`], and the smoothing experiments in [`diagnostics`].

pub mod birkhoff;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fourier;
pub mod gauge;
pub mod lax;
pub mod numeric;
pub mod solver;

pub use error::{Error, Result};
