//! Fractional Ornstein–Uhlenbeck processes `dx = −r x dt + dW`.
//!
//! The Stieltjes integral `∫ e^{rs} dW(s)` is evaluated by integration by
//! parts, `e^{rt}W(t) − e^{rt₀}W(t₀) − r∫ e^{rs}W(s) ds`, with the Riemann
//! remainder integrated exactly against the piecewise-linear interpolant of
//! the sampled `W`. Per step this telescopes to
//! `x_{k+1} = e^{−rh} x_k + ΔW_k (1 − e^{−rh})/(rh)`, which depends on the
//! driver only through its increments.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Nonlinearity, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::fbm::{FbmPath, NoiseField, TimeGrid};
use crate::lattice::{EState, LatticeConfig};

/// Absolute tolerance on the truncated tail `e^{−rT}(1+T)²`.
pub const TAIL_TOL: f64 = 1e-8;

/// `e^{−rate·T}(1+T)²`.
pub fn truncation_tail(rate: f64, t_trunc: f64) -> f64 {
    (-rate * t_trunc).exp() * (1.0 + t_trunc).powi(2)
}

/// Smallest whole-unit horizon with `truncation_tail(rate, T) ≤ tol`.
pub fn default_truncation(rate: f64, tol: f64) -> f64 {
    // The tail decreases once T > 2/rate − 1.
    let mut t = (2.0 / rate - 1.0).max(0.0).ceil();
    while truncation_tail(rate, t) > tol {
        t += 1.0;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrature {
    /// Integration by parts with an exact piecewise-linear remainder.
    #[default]
    IntegrationByParts,
    /// Direct left-point Riemann–Stieltjes sum `Σ e^{r t_j} ΔW_j`.
    LeftPoint,
}

/// `(1 − e^{−x})/x`, continuous at 0.
fn step_gain(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Lattice-valued (or scalar, with one site) fOU sample path.
#[derive(Debug, Clone)]
pub struct FouPath {
    grid: TimeGrid,
    rate: f64,
    sites: usize,
    values: Vec<f64>,
    t_trunc: Option<f64>,
    tail_bound: Option<f64>,
}

impl FouPath {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn n_sites(&self) -> usize {
        self.sites
    }

    /// Burn-in length before the first evaluation time, for stationary paths.
    pub fn t_trunc(&self) -> Option<f64> {
        self.t_trunc
    }

    /// `e^{−rate·T_trunc}(1+T_trunc)²` recorded at construction.
    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.sites..(k + 1) * self.sites]
    }

    /// Scalar value at local index `k` (first site).
    pub fn value(&self, k: usize) -> f64 {
        self.values[k * self.sites]
    }

    pub fn at(&self, t: f64) -> Result<&[f64]> {
        Ok(self.row(self.grid.index_of(t)?))
    }

    pub fn norm_sq(&self, k: usize) -> f64 {
        self.row(k).iter().map(|x| x * x).sum()
    }

    /// `(t, ‖x(t)‖)` at every grid point.
    pub fn norm_series(&self) -> Vec<(f64, f64)> {
        (0..self.grid.len())
            .map(|k| (self.grid.time(k), self.norm_sq(k).sqrt()))
            .collect()
    }
}

/// Run the recursion over `len` grid points of `increments(k)` (increment
/// from point `k` to `k+1`, one value per site).
fn recurse(
    rate: f64,
    h: f64,
    x0: &[f64],
    steps: usize,
    quadrature: Quadrature,
    mut increment: impl FnMut(usize, &mut [f64]),
) -> Vec<f64> {
    let sites = x0.len();
    let decay = (-rate * h).exp();
    let gain = match quadrature {
        Quadrature::IntegrationByParts => step_gain(rate * h),
        // Left point: e^{−r t_{k+1}} e^{r t_k} ΔW_k.
        Quadrature::LeftPoint => decay,
    };
    let mut out = Vec::with_capacity((steps + 1) * sites);
    out.extend_from_slice(x0);
    let mut x = x0.to_vec();
    let mut dw = vec![0.0; sites];
    for k in 0..steps {
        increment(k, &mut dw);
        for s in 0..sites {
            x[s] = decay * x[s] + gain * dw[s];
        }
        out.extend_from_slice(&x);
    }
    out
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(invalid("rate", format!("must be > 0, got {rate}")));
    }
    Ok(())
}

/// Forward solution `x(t) = x0 e^{−r(t−t0)} + e^{−rt}∫_{t0}^t e^{rs} dW(s)`
/// on the driver's grid points in `[t0, t1]`.
pub fn fou_forward(
    x0: f64,
    rate: f64,
    driver: &FbmPath,
    t0: f64,
    t1: f64,
    quadrature: Quadrature,
) -> Result<FouPath> {
    check_rate(rate)?;
    let g = driver.grid();
    let k0 = g.index_of(t0)?;
    let k1 = g.index_of(t1)?;
    if k1 <= k0 {
        return Err(invalid("t1", format!("must exceed t0 = {t0}")));
    }
    let values = recurse(rate, g.dt(), &[x0], k1 - k0, quadrature, |k, dw| {
        dw[0] = driver.value(k0 + k + 1) - driver.value(k0 + k);
    });
    Ok(FouPath {
        grid: TimeGrid::new(t0, g.dt(), k1 - k0)?,
        rate,
        sites: 1,
        values,
        t_trunc: None,
        tail_bound: None,
    })
}

fn check_tail(rate: f64, t_trunc: f64) -> Result<f64> {
    if !(t_trunc.is_finite() && t_trunc >= 0.0) {
        return Err(invalid("t_trunc", format!("must be >= 0, got {t_trunc}")));
    }
    let tail = truncation_tail(rate, t_trunc);
    if tail > TAIL_TOL {
        return Err(Error::TailTolerance {
            tail,
            tol: TAIL_TOL,
        });
    }
    Ok(tail)
}

/// Stationary solution `x̄(t) = e^{−rt}∫_{−∞}^t e^{rs} dW(s)` on
/// `[eval_t0, eval_t1]`, with the lower limit truncated to
/// `eval_t0 − t_trunc`.
pub fn fou_stationary(
    rate: f64,
    driver: &FbmPath,
    eval_t0: f64,
    eval_t1: f64,
    t_trunc: f64,
) -> Result<FouPath> {
    check_rate(rate)?;
    let tail = check_tail(rate, t_trunc)?;
    let g = driver.grid();
    let start = eval_t0 - t_trunc;
    let ks = window_index(g, start, eval_t1)?;
    let k0 = g.index_of(eval_t0)?;
    let k1 = g.index_of(eval_t1)?;
    if k1 <= k0 {
        return Err(invalid("eval_t1", format!("must exceed eval_t0 = {eval_t0}")));
    }
    let all = recurse(rate, g.dt(), &[0.0], k1 - ks, Quadrature::IntegrationByParts, |k, dw| {
        dw[0] = driver.value(ks + k + 1) - driver.value(ks + k);
    });
    Ok(FouPath {
        grid: TimeGrid::new(eval_t0, g.dt(), k1 - k0)?,
        rate,
        sites: 1,
        values: all[(k0 - ks)..].to_vec(),
        t_trunc: Some(t_trunc),
        tail_bound: Some(tail),
    })
}

fn window_index(g: &TimeGrid, start: f64, end: f64) -> Result<usize> {
    if start < g.t_start() - 1e-9 * g.dt() || end > g.t_end() + 1e-9 * g.dt() {
        return Err(Error::WindowExceeded {
            lo: start,
            hi: end,
            start: g.t_start(),
            end: g.t_end(),
        });
    }
    g.index_of(start)
}

/// The stationary pair `Φ̄ = (ū, v̄)`: `ū` has rate `λ` and driver `W1`,
/// `v̄` has rate `σ` and driver `W2`, sitewise.
#[derive(Debug, Clone)]
pub struct StationaryPair {
    pub u: FouPath,
    pub v: FouPath,
    config: LatticeConfig,
    varrho: f64,
}

impl StationaryPair {
    pub fn grid(&self) -> &TimeGrid {
        self.u.grid()
    }

    pub fn state(&self, k: usize) -> EState {
        EState::from_raw(self.config, self.u.row(k).to_vec(), self.v.row(k).to_vec(), self.varrho)
    }

    pub fn state_at(&self, t: f64) -> Result<EState> {
        Ok(self.state(self.grid().index_of(t)?))
    }

    /// `(t, ‖ū‖², ‖v̄‖², ‖f(ū)‖²)` at every grid point.
    pub fn radius_terms(&self, f: &dyn Nonlinearity) -> Vec<(f64, f64, f64, f64)> {
        (0..self.grid().len())
            .map(|k| {
                let u = self.u.row(k);
                let fu: f64 = u.iter().map(|&x| f.eval(x).powi(2)).sum();
                (self.grid().time(k), self.u.norm_sq(k), self.v.norm_sq(k), fu)
            })
            .collect()
    }
}

pub fn stationary_pair(
    params: &SystemParams,
    noise: &NoiseField,
    config: LatticeConfig,
    eval_t0: f64,
    eval_t1: f64,
    t_trunc: f64,
) -> Result<StationaryPair> {
    if noise.n_sites() != config.n_sites() {
        return Err(Error::Incompatible(format!(
            "noise has {} sites, lattice has {}",
            noise.n_sites(),
            config.n_sites()
        )));
    }
    check_rate(params.lambda)?;
    check_rate(params.sigma)?;
    let tail_u = check_tail(params.lambda, t_trunc)?;
    let tail_v = check_tail(params.sigma, t_trunc)?;
    let g = noise.grid();
    let ks = window_index(g, eval_t0 - t_trunc, eval_t1)?;
    let k0 = g.index_of(eval_t0)?;
    let k1 = g.index_of(eval_t1)?;
    if k1 <= k0 {
        return Err(invalid("eval_t1", format!("must exceed eval_t0 = {eval_t0}")));
    }
    let n = config.n_sites();
    let zero = vec![0.0; n];
    let build = |rate: f64, tail: f64, second: bool| -> Result<FouPath> {
        let row = |k: usize| if second { noise.w2_row(k) } else { noise.w1_row(k) };
        let all = recurse(rate, g.dt(), &zero, k1 - ks, Quadrature::IntegrationByParts, |k, dw| {
            let (a, b) = (row(ks + k), row(ks + k + 1));
            for s in 0..dw.len() {
                dw[s] = b[s] - a[s];
            }
        });
        Ok(FouPath {
            grid: TimeGrid::new(eval_t0, g.dt(), k1 - k0)?,
            rate,
            sites: n,
            values: all[(k0 - ks) * n..].to_vec(),
            t_trunc: Some(t_trunc),
            tail_bound: Some(tail),
        })
    };
    Ok(StationaryPair {
        u: build(params.lambda, tail_u, false)?,
        v: build(params.sigma, tail_v, true)?,
        config,
        varrho: params.varrho,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `‖x(t)‖ ≤ ρ (1+|t|)²`.
    Quadratic,
    /// `‖W_j(t)‖² ≤ 2 max{‖a‖², ‖b‖²} ρ² (1+|t|⁴)`.
    Quartic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub rho: f64,
    pub window: (f64, f64),
    pub normalization: Normalization,
    /// Per-site analogue of `rho` (sitewise supremum of the same ratio).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub per_site: Vec<f64>,
}

fn fit_rows<'a>(
    rows: impl Iterator<Item = (f64, &'a [f64])>,
    window: (f64, f64),
    weight: impl Fn(f64) -> f64,
    normalization: Normalization,
) -> Result<BoundEstimate> {
    if !(window.1 >= window.0) {
        return Err(invalid("window", format!("empty window {window:?}")));
    }
    let mut rho = 0.0_f64;
    let mut per_site: Vec<f64> = Vec::new();
    let mut seen = false;
    for (t, row) in rows.filter(|(t, _)| *t >= window.0 && *t <= window.1) {
        seen = true;
        let w = weight(t);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        rho = rho.max(norm / w);
        if per_site.is_empty() {
            per_site = vec![0.0; row.len()];
        }
        for (c, x) in per_site.iter_mut().zip(row) {
            *c = c.max(x.abs() / w);
        }
    }
    if !seen {
        return Err(invalid("window", format!("{window:?} contains no grid point")));
    }
    Ok(BoundEstimate {
        rho,
        window,
        normalization,
        per_site,
    })
}

/// Empirical `ρ = sup ‖x(t)‖/(1+|t|)²` over the grid points in `window`.
pub fn growth_bound_fit(path: &FouPath, window: (f64, f64)) -> Result<BoundEstimate> {
    let rows = (0..path.grid().len()).map(|k| (path.grid().time(k), path.row(k)));
    fit_rows(rows, window, |t| (1.0 + t.abs()).powi(2), Normalization::Quadratic)
}

/// Empirical noise constant `ρ` with
/// `‖W_j(t)‖² ≤ 2 max{‖a‖², ‖b‖²} ρ² (1+|t|⁴)`, `j = 1, 2`.
pub fn noise_growth_fit(noise: &NoiseField, window: (f64, f64)) -> Result<BoundEstimate> {
    let na: f64 = noise.a().iter().map(|x| x * x).sum();
    let nb: f64 = noise.b().iter().map(|x| x * x).sum();
    let scale = (2.0 * na.max(nb)).sqrt();
    let g = noise.grid();
    let weight = |t: f64| scale.max(f64::MIN_POSITIVE) * (1.0 + t.powi(4)).sqrt();
    let w1 = fit_rows(
        (0..g.len()).map(|k| (g.time(k), noise.w1_row(k))),
        window,
        weight,
        Normalization::Quartic,
    )?;
    let w2 = fit_rows(
        (0..g.len()).map(|k| (g.time(k), noise.w2_row(k))),
        window,
        weight,
        Normalization::Quartic,
    )?;
    Ok(BoundEstimate {
        rho: w1.rho.max(w2.rho),
        window,
        normalization: Normalization::Quartic,
        per_site: w1
            .per_site
            .iter()
            .zip(&w2.per_site)
            .map(|(x, y)| x.max(*y))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{sample_fbm, two_sided_fbm, FbmMethod, Hurst};

    fn driver(t0: f64, t1: f64, dt: f64, seed: u64) -> FbmPath {
        let g = TimeGrid::spanning(t0, t1, dt).unwrap();
        two_sided_fbm(g, Hurst::new(0.75).unwrap(), seed, FbmMethod::DaviesHarte).unwrap()
    }

    #[test]
    fn default_truncation_for_unit_rate() {
        let t = default_truncation(1.0, TAIL_TOL);
        assert_eq!(t, 25.0);
        assert!(truncation_tail(1.0, 24.0) > TAIL_TOL);
    }

    #[test]
    fn step_gain_limits() {
        assert!((step_gain(1e-12) - 1.0).abs() < 1e-12);
        assert!((step_gain(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn zero_increments_decay_exactly() {
        let vals = recurse(0.8, 0.125, &[2.0], 16, Quadrature::IntegrationByParts, |_, dw| dw[0] = 0.0);
        for (k, x) in vals.iter().enumerate() {
            let exact = 2.0 * (-0.8 * 0.125 * k as f64).exp();
            assert!((x - exact).abs() <= 1e-14 * exact);
        }
    }

    #[test]
    fn rejects_bad_rate() {
        let g = TimeGrid::new(0.0, 0.125, 16).unwrap();
        let p = sample_fbm(g, Hurst::new(0.7).unwrap(), 0, FbmMethod::Hosking).unwrap();
        assert!(fou_forward(1.0, 0.0, &p, 0.0, 1.0, Quadrature::IntegrationByParts).is_err());
        assert!(fou_forward(1.0, 1.0, &p, 1.0, 1.0, Quadrature::IntegrationByParts).is_err());
    }

    #[test]
    fn small_rate_tracks_driver() {
        let p = driver(0.0, 2.0, 1.0 / 64.0, 3);
        let x = fou_forward(0.0, 1e-10, &p, 0.0, 2.0, Quadrature::IntegrationByParts).unwrap();
        for k in 0..x.grid().len() {
            assert!((x.value(k) - p.value(k)).abs() < 1e-8);
        }
    }

    #[test]
    fn stationary_window_checks() {
        let p = driver(-10.0, 1.0, 0.25, 1);
        assert!(matches!(
            fou_stationary(1.0, &p, 0.0, 1.0, 5.0),
            Err(Error::TailTolerance { .. })
        ));
        let p = driver(-20.0, 1.0, 0.25, 1);
        assert!(matches!(
            fou_stationary(1.0, &p, 0.0, 1.0, 25.0),
            Err(Error::WindowExceeded { .. })
        ));
    }

    #[test]
    fn growth_fit_basics() {
        let p = driver(-30.0, 10.0, 0.25, 5);
        let x = fou_stationary(1.0, &p, -4.0, 8.0, 25.0).unwrap();
        let narrow = growth_bound_fit(&x, (-2.0, 2.0)).unwrap();
        let wide = growth_bound_fit(&x, (-4.0, 8.0)).unwrap();
        assert!(wide.rho >= narrow.rho);
        for k in 0..x.grid().len() {
            let t = x.grid().time(k);
            assert!(x.value(k).abs() <= wide.rho * (1.0 + t.abs()).powi(2) * (1.0 + 1e-12));
        }
        assert!(growth_bound_fit(&x, (100.0, 200.0)).is_err());
    }
}
