use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::dynamics::{Integrator, Nonlinearity, SystemParams};
use crate::error::{invalid, Result};
use crate::fbm::{path_rng, NoiseField};
use crate::lattice::EState;

use super::{run_pullback, AbsorbingRadius};

/// `count` states on the E-sphere of radius `ball_radius` around `center`.
pub fn sphere_states(center: &EState, ball_radius: f64, count: usize, seed: u64) -> Result<Vec<EState>> {
    if !(ball_radius.is_finite() && ball_radius >= 0.0) {
        return Err(invalid("ball_radius", format!("must be >= 0, got {ball_radius}")));
    }
    let mut rng = path_rng(seed);
    let n = center.config().n_sites();
    (0..count)
        .map(|_| {
            let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let d = EState::from_raw(center.config(), u, v, center.varrho());
            let norm = d.e_norm();
            center.add(&d.scale(ball_radius / norm))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct HorizonAbsorption {
    pub horizon: f64,
    /// `max ‖Ψ(0)‖²_E` over initial states.
    pub max_norm_sq: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorptionReport {
    /// `‖Φ̄₀‖²_E + R²`.
    pub bound: f64,
    pub abs_tol: f64,
    pub ball_radius: f64,
    pub horizons: Vec<HorizonAbsorption>,
    /// First horizon from which the bound holds at every deeper horizon.
    pub t_d: Option<f64>,
    pub pass: bool,
}

/// Check `‖Ψ(0)‖²_E ≤ ‖Φ̄₀‖²_E + R² + abs_tol` for pullback states started
/// from `inits` at every horizon.
#[allow(clippy::too_many_arguments)]
pub fn verify_absorption(
    params: &SystemParams,
    f: &dyn Nonlinearity,
    noise: &NoiseField,
    radius: &AbsorbingRadius,
    inits: &[EState],
    ball_radius: f64,
    horizons: &[f64],
    abs_tol: f64,
    integrator: Integrator,
) -> Result<AbsorptionReport> {
    let report = run_pullback(params, f, noise, inits, horizons, integrator)?;
    let bound = radius.phi_bar0_norm_sq + radius.r_sq;
    let rows: Vec<HorizonAbsorption> = report
        .states
        .iter()
        .zip(horizons)
        .map(|(states, &horizon)| {
            let max_norm_sq = states.iter().map(EState::e_norm_sq).fold(0.0, f64::max);
            HorizonAbsorption {
                horizon,
                max_norm_sq,
                holds: max_norm_sq <= bound + abs_tol,
            }
        })
        .collect();
    let first_good = rows.iter().rposition(|r| !r.holds).map_or(0, |k| k + 1);
    let t_d = rows.get(first_good).map(|r| r.horizon);
    Ok(AbsorptionReport {
        bound,
        abs_tol,
        ball_radius,
        t_d,
        pass: t_d.is_some(),
        horizons: rows,
    })
}
