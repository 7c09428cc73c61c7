use super::nonlinearity::Nonlinearity;
use super::params::SystemParams;
use crate::error::{Error, Result};
use crate::fbm::NoiseField;
use crate::lattice::{laplacian, Boundary, EState, LatticeVector};

/// Drift `G(Ψ) = LΨ + F(Ψ)`:
/// `(−A u − λu + f(u) − v, ϱu − σv)`.
pub fn drift_g(state: &EState, params: &SystemParams, f: &dyn Nonlinearity) -> EState {
    let cfg = state.config();
    let n = cfg.n_sites();
    let (mut du, mut dv) = (vec![0.0; n], vec![0.0; n]);
    let mut lap = vec![0.0; n];
    eval_drift(
        state.u.values(),
        state.v.values(),
        params,
        f,
        cfg.boundary(),
        &mut lap,
        &mut du,
        &mut dv,
    );
    EState::from_raw(cfg, du, dv, state.varrho())
}

/// Shared drift kernel; `lap` is scratch space.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn eval_drift(
    u: &[f64],
    v: &[f64],
    params: &SystemParams,
    f: &dyn Nonlinearity,
    boundary: Boundary,
    lap: &mut [f64],
    du: &mut [f64],
    dv: &mut [f64],
) {
    laplacian(u, lap, boundary);
    for s in 0..u.len() {
        du[s] = -lap[s] - params.lambda * u[s] + f.eval(u[s]) - v[s];
        dv[s] = params.varrho * u[s] - params.sigma * v[s];
    }
}

/// Right-hand side of the pathwise random ODE for `ũ = u − W1`,
/// `ṽ = v − W2` at time `t`:
///
/// ```text
/// dũ/dt = −Aũ − λũ + f(ũ + W1) − ṽ − A W1 − λ W1 − W2
/// dṽ/dt = ϱũ − σṽ + ϱ W1 − σ W2
/// ```
///
/// Noise between grid samples is linearly interpolated.
pub fn transformed_drift(
    u_tilde: &LatticeVector,
    v_tilde: &LatticeVector,
    t: f64,
    noise: &NoiseField,
    params: &SystemParams,
    f: &dyn Nonlinearity,
) -> Result<(LatticeVector, LatticeVector)> {
    let cfg = u_tilde.config();
    let n = cfg.n_sites();
    if noise.n_sites() != n || !u_tilde.is_on_window() || !v_tilde.is_on_window() {
        return Err(Error::Incompatible(format!(
            "noise has {} sites, state has {n}",
            noise.n_sites()
        )));
    }
    let pos = noise.grid().position_of(t)?;
    let mut sys = Rhs::new(params, f, noise, cfg.boundary(), n);
    let (mut du, mut dv) = (vec![0.0; n], vec![0.0; n]);
    sys.eval(pos, u_tilde.values(), v_tilde.values(), &mut du, &mut dv);
    Ok((LatticeVector::new(cfg, du)?, LatticeVector::new(cfg, dv)?))
}

/// Evaluator of the transformed right-hand side with reusable buffers.
pub(crate) struct Rhs<'a> {
    params: &'a SystemParams,
    f: &'a dyn Nonlinearity,
    noise: &'a NoiseField,
    boundary: Boundary,
    pub(crate) w1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    lap: Vec<f64>,
}

impl<'a> Rhs<'a> {
    pub(crate) fn new(
        params: &'a SystemParams,
        f: &'a dyn Nonlinearity,
        noise: &'a NoiseField,
        boundary: Boundary,
        n: usize,
    ) -> Self {
        Self {
            params,
            f,
            noise,
            boundary,
            w1: vec![0.0; n],
            w2: vec![0.0; n],
            u: vec![0.0; n],
            v: vec![0.0; n],
            lap: vec![0.0; n],
        }
    }

    /// Since `ũ + W1 = u` and `ṽ + W2 = v`, the transformed field equals the
    /// drift evaluated at the recovered state.
    pub(crate) fn eval(&mut self, pos: f64, ut: &[f64], vt: &[f64], du: &mut [f64], dv: &mut [f64]) {
        self.noise.fill_at_position(pos, &mut self.w1, &mut self.w2);
        for s in 0..ut.len() {
            self.u[s] = ut[s] + self.w1[s];
            self.v[s] = vt[s] + self.w2[s];
        }
        eval_drift(
            &self.u,
            &self.v,
            self.params,
            self.f,
            self.boundary,
            &mut self.lap,
            du,
            dv,
        );
    }

    pub(crate) fn noise_at(&mut self, pos: f64) -> (&[f64], &[f64]) {
        self.noise.fill_at_position(pos, &mut self.w1, &mut self.w2);
        (&self.w1, &self.w2)
    }
}
