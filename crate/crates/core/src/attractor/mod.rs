//! Experiment harnesses for pathwise contraction, pullback convergence,
//! absorption and the singleton random attractor.

mod absorption;
mod contraction;
mod equilibrium;
mod pullback;
mod radius;
mod singleton;

pub use absorption::{sphere_states, verify_absorption, AbsorptionReport, HorizonAbsorption};
pub use contraction::{run_contraction, Confidence, ContractionReport, RATE_TOL};
pub use equilibrium::{verify_equilibrium, EquilibriumReport};
pub use pullback::{run_pullback, spread_states, PullbackReport};
pub use radius::{
    compute_absorbing_radius, default_c4, default_quad_horizon, AbsorbingRadius, QUAD_TAIL,
};
pub use singleton::{singleton_check, singleton_tol, SingletonReport};

use crate::error::Result;
use crate::lattice::EState;

/// Largest pairwise E-distance.
pub fn diameter(states: &[EState]) -> Result<f64> {
    let mut d = 0.0_f64;
    for (i, a) in states.iter().enumerate() {
        for b in &states[i + 1..] {
            d = d.max(a.distance(b)?);
        }
    }
    Ok(d)
}
