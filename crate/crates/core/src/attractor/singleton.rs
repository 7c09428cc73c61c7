use serde::Serialize;

use crate::dynamics::{Integrator, Nonlinearity, SystemParams};
use crate::error::{invalid, Result};
use crate::fbm::NoiseField;
use crate::lattice::EState;

use super::{diameter, run_pullback};

/// `max(1e−8, diam · e^{−αT} · 10)`.
pub fn singleton_tol(diam: f64, alpha: f64, t_deep: f64) -> f64 {
    (diam * (-alpha * t_deep).exp() * 10.0).max(1e-8)
}

#[derive(Debug, Clone, Serialize)]
pub struct SingletonReport {
    pub t_deep: f64,
    pub diameter: f64,
    /// Pairwise spread at `T_deep/2` and `T_deep`.
    pub half_spread: f64,
    pub spread: f64,
    pub tol: f64,
    /// `spread / half_spread`, compared against `e^{−α T_deep/2}`.
    pub shrink: Option<f64>,
    pub pass: bool,
}

pub fn singleton_check(
    params: &SystemParams,
    f: &dyn Nonlinearity,
    noise: &NoiseField,
    inits: &[EState],
    t_deep: f64,
    integrator: Integrator,
) -> Result<SingletonReport> {
    if inits.len() < 2 {
        return Err(invalid("inits", "need at least two initial states"));
    }
    let half = noise.grid().dt() * (0.5 * t_deep / noise.grid().dt()).round();
    let report = run_pullback(params, f, noise, inits, &[half, t_deep], integrator)?;
    let diam = diameter(inits)?;
    let tol = singleton_tol(diam, params.alpha(), t_deep);
    let (half_spread, spread) = (report.spread[0], report.spread[1]);
    Ok(SingletonReport {
        t_deep,
        diameter: diam,
        half_spread,
        spread,
        tol,
        shrink: (half_spread > 0.0).then(|| spread / half_spread),
        pass: spread <= tol,
    })
}
