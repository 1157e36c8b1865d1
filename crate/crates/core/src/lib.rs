//! Phase retrieval and Fourier source reconstruction for the two-dimensional
//! Helmholtz inverse source problem.
//!
//! The crate simulates radiated fields of a source supported in the square
//! `V0 = (-a, a)^2`, records phaseless data on a measurement circle together
//! with data from artificially injected reference point sources, recovers the
//! lost phase sector by sector through a closed-form 2x2 solve, and
//! reconstructs the source as a truncated Fourier series whose coefficients
//! are boundary integrals of the propagated field.
//!
//! Everything here is pure computation and builds without `std`; file formats,
//! configuration and the command line live in the `phaseless` crate.
//!
//! | module | contents |
//! |--------|----------|
//! | [`specfun`] | Bessel and Hankel functions of integer order, remainder bounds |
//! | [`scene`] | geometry, sectors, reference points, admissible wavenumbers |
//! | [`forward`] | radiated fields, reference fields, scaling factors, noise |
//! | [`retrieval`] | pointwise phase retrieval and stability diagnostics |
//! | [`fourier`] | angular spectra, field propagation, Fourier coefficients |
//! | [`pipeline`] | end-to-end experiment runs and error metrics |
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod forward;
pub mod fourier;
pub mod metrics;
pub mod pipeline;
pub mod retrieval;
pub mod scene;
pub mod sources;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A point in the plane.
pub type Point = [f64; 2];
