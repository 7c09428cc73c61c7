use serde::Serialize;

use crate::dynamics::{Nonlinearity, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::fbm::NoiseField;
use crate::fou::stationary_pair;
use crate::lattice::{EState, LatticeConfig};

/// Tail level `e^{−αq}(1+q)⁴` defining the default quadrature horizon.
pub const QUAD_TAIL: f64 = 1e-5;

/// Estimated tail must not exceed this fraction of the radicand.
const TAIL_REL_TOL: f64 = 1e-4;

/// Degree of the polynomial envelope used for the truncated tail.
const ENVELOPE_DEGREE: i32 = 4;

/// `max{32/λ + 4ϱ/σ, 4/γ, 8/λ} · max{1, ϱ}`.
pub fn default_c4(params: &SystemParams) -> f64 {
    let base = (32.0 / params.lambda + 4.0 * params.varrho / params.sigma)
        .max(4.0 / params.gamma)
        .max(8.0 / params.lambda);
    base * params.varrho.max(1.0)
}

/// Smallest whole-unit `q` with `e^{−αq}(1+q)⁴ ≤ QUAD_TAIL`.
pub fn default_quad_horizon(alpha: f64) -> f64 {
    let mut q = (4.0 / alpha - 1.0).max(0.0).ceil();
    while (-alpha * q).exp() * (1.0 + q).powi(ENVELOPE_DEGREE) > QUAD_TAIL {
        q += 1.0;
    }
    q
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorbingRadius {
    pub r: f64,
    pub r_sq: f64,
    pub quad_horizon: f64,
    pub t_trunc: f64,
    /// `∫ e^{αs}‖ū(s)‖² ds`
    pub integral_u: f64,
    /// `∫ e^{αs}‖v̄(s)‖² ds`
    pub integral_v: f64,
    /// `∫ e^{αs}‖f(ū(s))‖² ds`
    pub integral_f: f64,
    pub c4: f64,
    /// `sup h(s)/(1+|s|)⁴` over the quadrature window.
    pub envelope: f64,
    /// `c₄ K ∫_q^∞ e^{−αx}(1+x)⁴ dx`
    pub tail_estimate: f64,
    /// `‖Φ̄₀‖²_E`
    pub phi_bar0_norm_sq: f64,
    #[serde(skip)]
    pub phi_bar0: EState,
}

/// `∫_q^∞ e^{−αx}(1+x)^d dx = e^{−αq} Σ_{j=0}^{d} d!/(d−j)! (1+q)^{d−j}/α^{j+1}`.
fn envelope_tail(alpha: f64, q: f64, d: i32) -> f64 {
    let mut sum = 0.0;
    let mut falling = 1.0;
    for j in 0..=d {
        sum += falling * (1.0 + q).powi(d - j) / alpha.powi(j + 1);
        falling *= (d - j) as f64;
    }
    (-alpha * q).exp() * sum
}

/// `R(ω) = sqrt(1 + c₄ ∫_{−q}^0 e^{αs}(‖ū‖² + ‖v̄‖² + ‖f(ū)‖²) ds)` by the
/// trapezoid rule on the noise grid, with the stationary pair burnt in over
/// `t_trunc` before `−q`.
pub fn compute_absorbing_radius(
    params: &SystemParams,
    f: &dyn Nonlinearity,
    noise: &NoiseField,
    config: LatticeConfig,
    quad_horizon: f64,
    c4: f64,
    t_trunc: f64,
) -> Result<AbsorbingRadius> {
    if !(quad_horizon.is_finite() && quad_horizon > 0.0) {
        return Err(invalid("quad_horizon", format!("must be > 0, got {quad_horizon}")));
    }
    if !(c4.is_finite() && c4 > 0.0) {
        return Err(invalid("c4", format!("must be > 0, got {c4}")));
    }
    let alpha = params.alpha();
    let pair = stationary_pair(params, noise, config, -quad_horizon, 0.0, t_trunc)?;
    let terms = pair.radius_terms(f);
    let h = pair.grid().dt();
    let (mut iu, mut iv, mut ifu) = (0.0, 0.0, 0.0);
    let mut envelope = 0.0_f64;
    let last = terms.len() - 1;
    for (k, &(s, nu, nv, nf)) in terms.iter().enumerate() {
        let w = if k == 0 || k == last { 0.5 } else { 1.0 } * h * (alpha * s).exp();
        iu += w * nu;
        iv += w * nv;
        ifu += w * nf;
        envelope = envelope.max((nu + nv + nf) / (1.0 + s.abs()).powi(ENVELOPE_DEGREE));
    }
    let r_sq = 1.0 + c4 * (iu + iv + ifu);
    let tail = c4 * envelope * envelope_tail(alpha, quad_horizon, ENVELOPE_DEGREE);
    if tail > TAIL_REL_TOL * r_sq {
        return Err(Error::TailTolerance {
            tail,
            tol: TAIL_REL_TOL * r_sq,
        });
    }
    let phi_bar0 = pair.state(last);
    Ok(AbsorbingRadius {
        r: r_sq.sqrt(),
        r_sq,
        quad_horizon,
        t_trunc,
        integral_u: iu,
        integral_v: iv,
        integral_f: ifu,
        c4,
        envelope,
        tail_estimate: tail,
        phi_bar0_norm_sq: phi_bar0.e_norm_sq(),
        phi_bar0,
    })
}
