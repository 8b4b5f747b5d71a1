//! Spectral laboratory for the semiclassical defocusing nonlinear Schrödinger
//! equation
//!
//! ```text
//! iε ∂ₜu + (ε²/2) Δu = |u|^{2σ} u,      u(0) = a₀,
//! ```
//!
//! its WKB limit (the compressible Euler type system in the variables
//! `(v, u = a^σ)`), the modulated energy functional comparing the two, the
//! Gaussian wave-packet transform used to microlocalize the estimates, and the
//! Sobolev norm-inflation experiment built on the isotropic rescaling
//! `u^ε(t, x) = h^{n/2-s} ψ^h(h²εt, hx)`.
//!
//! Everything is discretized on a periodic box with FFT-based calculus; see
//! [`grid`] and [`spectral`].

pub mod error;
pub mod fit;
pub mod grid;
pub mod inflation;
pub mod io;
pub mod limit;
pub mod modulated;
pub mod nls;
pub mod quad;
pub mod spectral;
pub mod wavepacket;

mod fft;
mod par;

pub use error::{Error, ErrorKind, Result};
pub use grid::{Field, Grid, RealField, VectorField};
pub use rustfft::num_complex::Complex64;
