use serde::Serialize;

use crate::dynamics::{integrate, Integrator, Nonlinearity, SystemParams};
use crate::error::{Error, Result};
use crate::fbm::NoiseField;
use crate::lattice::EState;
use crate::stats::linear_fit;

/// Absolute tolerance on fitted rates.
pub const RATE_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Full,
    /// The distance reached the floating-point floor before the nominal
    /// fit window; the fit uses whatever points remain above the floor.
    Reduced,
    /// Identical initial states: nothing to fit.
    Identical,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    /// `(t, log‖Ψ(t)−Φ(t)‖²_E)`; `-inf` where the distance is zero.
    pub series: Vec<(f64, f64)>,
    pub initial_distance: f64,
    pub fitted_slope: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
    /// `−2α`.
    pub bound: f64,
    pub rate_tol: f64,
    /// `bound + rate_tol − fitted_slope`; non-negative on success.
    pub margin: Option<f64>,
    pub confidence: Confidence,
    pub pass: bool,
}

/// Integrate `Ψ0` and `Φ0` on the same noise over `[0, t_end]` and fit the
/// decay rate of their squared E-distance.
pub fn run_contraction(
    params: &SystemParams,
    f: &dyn Nonlinearity,
    noise: &NoiseField,
    psi0: &EState,
    phi0: &EState,
    t_end: f64,
    integrator: Integrator,
) -> Result<ContractionReport> {
    let d0 = psi0.distance(phi0)?;
    let (a, b) = rayon::join(
        || integrate(psi0, noise, 0.0, t_end, params, f, integrator),
        || integrate(phi0, noise, 0.0, t_end, params, f, integrator),
    );
    let (a, b) = (a?, b?);
    let mut series = Vec::with_capacity(a.len());
    for k in 0..a.len() {
        let d = a.state(k).distance(&b.state(k))?;
        series.push((a.grid().time(k), (d * d).ln()));
    }
    let bound = -2.0 * params.alpha();
    if d0 == 0.0 {
        if series.iter().any(|&(_, l)| l != f64::NEG_INFINITY) {
            return Err(Error::Incompatible("identical initial states separated".into()));
        }
        return Ok(ContractionReport {
            series,
            initial_distance: 0.0,
            fitted_slope: None,
            fit_window: None,
            bound,
            rate_tol: RATE_TOL,
            margin: None,
            confidence: Confidence::Identical,
            pass: true,
        });
    }

    let floor = (1e2 * f64::EPSILON * d0).powi(2).ln();
    // Last time before the distance first drops to the floor.
    let stop = series
        .iter()
        .position(|&(_, l)| l <= floor)
        .unwrap_or(series.len());
    let t_lo = 0.1 * t_end;
    let mut pts: Vec<(f64, f64)> = series[..stop]
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t_lo)
        .collect();
    let mut confidence = Confidence::Full;
    if pts.len() < 2 {
        confidence = Confidence::Reduced;
        pts = series[..stop.max(2).min(series.len())].to_vec();
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let slope = linear_fit(&xs, &ys).map(|(m, _)| m);
    let margin = slope.map(|m| bound + RATE_TOL - m);
    Ok(ContractionReport {
        initial_distance: d0,
        fit_window: Some((xs[0], xs[xs.len() - 1])),
        fitted_slope: slope,
        bound,
        rate_tol: RATE_TOL,
        margin,
        confidence,
        pass: margin.is_some_and(|m| m >= 0.0),
        series,
    })
}
