use serde::Serialize;

use crate::dynamics::{integrate_final, Integrator, Nonlinearity, SystemParams};
use crate::error::Result;
use crate::fbm::NoiseField;
use crate::lattice::EState;

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumReport {
    pub t: f64,
    pub t_max: f64,
    /// `‖φ(t, ω, Ψ*(ω)) − Ψ*(θ_t ω)‖_E`
    pub residual: f64,
    pub equilibrium_norm: f64,
}

/// Estimate `Ψ*(ω)` by pullback from `−t_max` starting at `init`, push it
/// forward by `t`, and compare with the pullback estimate on `θ_t ω`.
pub fn verify_equilibrium(
    params: &SystemParams,
    f: &dyn Nonlinearity,
    noise: &NoiseField,
    init: &EState,
    t: f64,
    t_max: f64,
    integrator: Integrator,
) -> Result<EquilibriumReport> {
    let star = integrate_final(init, noise, -t_max, 0.0, params, f, integrator)?;
    let pushed = integrate_final(&star, noise, 0.0, t, params, f, integrator)?;
    let shifted = noise.shift(t)?;
    let star_shifted = integrate_final(init, &shifted, -t_max, 0.0, params, f, integrator)?;
    Ok(EquilibriumReport {
        t,
        t_max,
        residual: pushed.distance(&star_shifted)?,
        equilibrium_norm: star.e_norm(),
    })
}
