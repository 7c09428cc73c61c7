//! Numerical laboratory for stochastic FitzHugh–Nagumo lattice equations
//! driven by fractional Brownian motion with Hurst index in (1/2, 1).
//!
//! The crate is organised bottom-up:
//!
//! - [`fbm`]: exact-covariance fBm synthesis, two-sided paths, Wiener shifts
//!   and per-site noise fields.
//! - [`lattice`]: truncated lattice operators and the weighted phase space.
//! - [`dynamics`]: drift, the pathwise transformed system, integrators and
//!   the cocycle map.
//! - [`fou`]: fractional Ornstein–Uhlenbeck forward and stationary solutions.
//! - [`attractor`]: contraction, pullback, absorption and singleton
//!   experiments.
//! - [`io`]: CSV and JSON artifact writers.

pub mod attractor;
pub mod dynamics;
pub mod error;
pub mod fbm;
pub mod fou;
pub mod io;
pub mod lattice;
pub mod stats;

pub use error::{Error, Result};
