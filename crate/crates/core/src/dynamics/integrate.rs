use serde::{Deserialize, Serialize};

use super::drift::Rhs;
use super::nonlinearity::Nonlinearity;
use super::params::SystemParams;
use crate::error::{invalid, Error, Result};
use crate::fbm::{NoiseField, TimeGrid};
use crate::lattice::{EState, LatticeConfig};
use crate::stats::linear_fit;

/// Abort threshold on `‖Ψ‖_E`.
pub const BLOW_UP_NORM: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Euler,
    #[default]
    Rk4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Euler => 1,
            Scheme::Rk4 => 4,
        }
    }
}

/// Time stepping over the noise grid: one step spans `stride` noise samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Integrator {
    pub scheme: Scheme,
    pub stride: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4,
            stride: 1,
        }
    }
}

impl Integrator {
    pub fn new(scheme: Scheme, stride: usize) -> Self {
        Self { scheme, stride }
    }
}

/// Solution sampled at every integration step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: TimeGrid,
    config: LatticeConfig,
    varrho: f64,
    params: SystemParams,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn config(&self) -> LatticeConfig {
        self.config
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn u_row(&self, k: usize) -> &[f64] {
        let n = self.config.n_sites();
        &self.u[k * n..(k + 1) * n]
    }

    pub fn v_row(&self, k: usize) -> &[f64] {
        let n = self.config.n_sites();
        &self.v[k * n..(k + 1) * n]
    }

    pub fn state(&self, k: usize) -> EState {
        EState::from_raw(self.config, self.u_row(k).to_vec(), self.v_row(k).to_vec(), self.varrho)
    }

    pub fn last(&self) -> EState {
        self.state(self.len() - 1)
    }

    /// `(t, ‖Ψ(t)‖²_E)` at every step.
    pub fn e_norm_sq_series(&self) -> Vec<(f64, f64)> {
        (0..self.len())
            .map(|k| {
                let nu: f64 = self.u_row(k).iter().map(|x| x * x).sum();
                let nv: f64 = self.v_row(k).iter().map(|x| x * x).sum();
                (self.grid.time(k), nu + nv / self.varrho)
            })
            .collect()
    }
}

struct Plan {
    k0: usize,
    steps: usize,
    stride: usize,
    h: f64,
}

fn plan(noise: &NoiseField, state: &EState, t0: f64, t1: f64, integrator: Integrator) -> Result<Plan> {
    if integrator.stride == 0 {
        return Err(invalid("stride", "must be at least 1"));
    }
    if noise.n_sites() != state.config().n_sites() {
        return Err(Error::Incompatible(format!(
            "noise has {} sites, state has {}",
            noise.n_sites(),
            state.config().n_sites()
        )));
    }
    let grid = noise.grid();
    let k0 = grid.index_of(t0)?;
    let k1 = grid.index_of(t1)?;
    if k1 < k0 {
        return Err(invalid("t1", format!("must not precede t0 = {t0}")));
    }
    let span = k1 - k0;
    if span % integrator.stride != 0 {
        return Err(Error::Misaligned {
            t: t1 - t0,
            dt: grid.dt() * integrator.stride as f64,
        });
    }
    Ok(Plan {
        k0,
        steps: span / integrator.stride,
        stride: integrator.stride,
        h: grid.dt() * integrator.stride as f64,
    })
}

struct Stepper<'a> {
    rhs: Rhs<'a>,
    scheme: Scheme,
    varrho: f64,
    k: [Vec<f64>; 8],
    tmp_u: Vec<f64>,
    tmp_v: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(
        params: &'a SystemParams,
        f: &'a dyn Nonlinearity,
        noise: &'a NoiseField,
        config: LatticeConfig,
        scheme: Scheme,
        varrho: f64,
    ) -> Self {
        let n = config.n_sites();
        Self {
            rhs: Rhs::new(params, f, noise, config.boundary(), n),
            scheme,
            varrho,
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp_u: vec![0.0; n],
            tmp_v: vec![0.0; n],
        }
    }

    /// Advance `(ũ, ṽ)` from noise position `pos` by `h` (spanning `span`
    /// noise samples).
    fn step(&mut self, pos: f64, span: f64, h: f64, ut: &mut [f64], vt: &mut [f64]) {
        let n = ut.len();
        match self.scheme {
            Scheme::Euler => {
                let [du, dv, ..] = &mut self.k;
                self.rhs.eval(pos, ut, vt, du, dv);
                for s in 0..n {
                    ut[s] += h * du[s];
                    vt[s] += h * dv[s];
                }
            }
            Scheme::Rk4 => {
                let [k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v] = &mut self.k;
                let (tu, tv) = (&mut self.tmp_u, &mut self.tmp_v);
                self.rhs.eval(pos, ut, vt, k1u, k1v);
                for s in 0..n {
                    tu[s] = ut[s] + 0.5 * h * k1u[s];
                    tv[s] = vt[s] + 0.5 * h * k1v[s];
                }
                self.rhs.eval(pos + 0.5 * span, tu, tv, k2u, k2v);
                for s in 0..n {
                    tu[s] = ut[s] + 0.5 * h * k2u[s];
                    tv[s] = vt[s] + 0.5 * h * k2v[s];
                }
                self.rhs.eval(pos + 0.5 * span, tu, tv, k3u, k3v);
                for s in 0..n {
                    tu[s] = ut[s] + h * k3u[s];
                    tv[s] = vt[s] + h * k3v[s];
                }
                self.rhs.eval(pos + span, tu, tv, k4u, k4v);
                for s in 0..n {
                    ut[s] += h / 6.0 * (k1u[s] + 2.0 * k2u[s] + 2.0 * k3u[s] + k4u[s]);
                    vt[s] += h / 6.0 * (k1v[s] + 2.0 * k2v[s] + 2.0 * k3v[s] + k4v[s]);
                }
            }
        }
    }

    /// Recover `(u, v) = (ũ + W1, ṽ + W2)` at `pos` into the output rows and
    /// return `‖Ψ‖²_E`.
    fn recover(&mut self, pos: f64, ut: &[f64], vt: &[f64], u: &mut [f64], v: &mut [f64]) -> f64 {
        let (w1, w2) = self.rhs.noise_at(pos);
        let (mut nu, mut nv) = (0.0, 0.0);
        for s in 0..ut.len() {
            u[s] = ut[s] + w1[s];
            v[s] = vt[s] + w2[s];
            nu += u[s] * u[s];
            nv += v[s] * v[s];
        }
        nu + nv / self.varrho
    }

    fn subtract_noise(&mut self, pos: f64, u: &[f64], v: &[f64], ut: &mut [f64], vt: &mut [f64]) {
        let (w1, w2) = self.rhs.noise_at(pos);
        for s in 0..u.len() {
            ut[s] = u[s] - w1[s];
            vt[s] = v[s] - w2[s];
        }
    }
}

fn guard(norm_sq: f64, t: f64) -> Result<()> {
    let norm = norm_sq.sqrt();
    if !norm.is_finite() || norm > BLOW_UP_NORM {
        return Err(Error::BlowUp { t, norm });
    }
    Ok(())
}

/// Integrate the pathwise transformed system from `t0` to `t1` and return
/// the recovered solution at every step.
pub fn integrate(
    psi0: &EState,
    noise: &NoiseField,
    t0: f64,
    t1: f64,
    params: &SystemParams,
    f: &dyn Nonlinearity,
    integrator: Integrator,
) -> Result<Trajectory> {
    check_weight(psi0, params)?;
    let plan = plan(noise, psi0, t0, t1, integrator)?;
    if plan.steps == 0 {
        return Err(invalid("t1", format!("trajectory needs t1 > t0 = {t0}")));
    }
    let config = psi0.config();
    let n = config.n_sites();
    let mut stepper = Stepper::new(params, f, noise, config, integrator.scheme, psi0.varrho());
    let (mut ut, mut vt) = (vec![0.0; n], vec![0.0; n]);
    let pos0 = plan.k0 as f64;
    stepper.subtract_noise(pos0, psi0.u.values(), psi0.v.values(), &mut ut, &mut vt);

    let len = plan.steps + 1;
    let mut u = vec![0.0; len * n];
    let mut v = vec![0.0; len * n];
    u[..n].copy_from_slice(psi0.u.values());
    v[..n].copy_from_slice(psi0.v.values());
    let span = plan.stride as f64;
    let grid_dt = noise.grid().dt();
    let t_origin = noise.grid().t_start();
    for j in 0..plan.steps {
        let pos = (plan.k0 + j * plan.stride) as f64;
        stepper.step(pos, span, plan.h, &mut ut, &mut vt);
        let next = pos + span;
        let (ur, vr) = (&mut u[(j + 1) * n..(j + 2) * n], &mut v[(j + 1) * n..(j + 2) * n]);
        let nsq = stepper.recover(next, &ut, &vt, ur, vr);
        guard(nsq, t_origin + next * grid_dt)?;
    }
    let grid = TimeGrid::new(t0, plan.h, plan.steps)?;
    Ok(Trajectory {
        grid,
        config,
        varrho: psi0.varrho(),
        params: *params,
        u,
        v,
    })
}

/// Final state of [`integrate`] without storing the path.
pub fn integrate_final(
    psi0: &EState,
    noise: &NoiseField,
    t0: f64,
    t1: f64,
    params: &SystemParams,
    f: &dyn Nonlinearity,
    integrator: Integrator,
) -> Result<EState> {
    check_weight(psi0, params)?;
    let plan = plan(noise, psi0, t0, t1, integrator)?;
    if plan.steps == 0 {
        return Ok(psi0.clone());
    }
    let config = psi0.config();
    let n = config.n_sites();
    let mut stepper = Stepper::new(params, f, noise, config, integrator.scheme, psi0.varrho());
    let (mut ut, mut vt) = (vec![0.0; n], vec![0.0; n]);
    stepper.subtract_noise(plan.k0 as f64, psi0.u.values(), psi0.v.values(), &mut ut, &mut vt);
    let (mut u, mut v) = (vec![0.0; n], vec![0.0; n]);
    let span = plan.stride as f64;
    for j in 0..plan.steps {
        let pos = (plan.k0 + j * plan.stride) as f64;
        stepper.step(pos, span, plan.h, &mut ut, &mut vt);
        let nsq = stepper.recover(pos + span, &ut, &vt, &mut u, &mut v);
        guard(nsq, noise.grid().t_start() + (pos + span) * noise.grid().dt())?;
    }
    Ok(EState::from_raw(config, u, v, psi0.varrho()))
}

fn check_weight(psi0: &EState, params: &SystemParams) -> Result<()> {
    if psi0.varrho() != params.varrho {
        return Err(Error::Incompatible(format!(
            "state weight {} differs from varrho {}",
            psi0.varrho(),
            params.varrho
        )));
    }
    Ok(())
}

/// The cocycle `φ(t, ω, Ψ0)`: the time-`t` solution map started at time 0
/// on the noise path `ω`.
pub fn cocycle_phi(
    t: f64,
    noise: &NoiseField,
    psi0: &EState,
    params: &SystemParams,
    f: &dyn Nonlinearity,
    integrator: Integrator,
) -> Result<EState> {
    if t < 0.0 {
        return Err(invalid("t", format!("cocycle time must be >= 0, got {t}")));
    }
    integrate_final(psi0, noise, 0.0, t, params, f, integrator)
}

/// `‖φ(t+τ, ω, x) − φ(τ, θ_t ω, φ(t, ω, x))‖_E`.
pub fn cocycle_residual(
    t: f64,
    tau: f64,
    noise: &NoiseField,
    x: &EState,
    params: &SystemParams,
    f: &dyn Nonlinearity,
    integrator: Integrator,
) -> Result<f64> {
    let direct = cocycle_phi(t + tau, noise, x, params, f, integrator)?;
    let mid = cocycle_phi(t, noise, x, params, f, integrator)?;
    let shifted = noise.shift(t)?;
    let composed = cocycle_phi(tau, &shifted, &mid, params, f, integrator)?;
    direct.distance(&composed)
}

/// Successive differences of `φ(t, ω, x)` as the step is refined over a
/// fixed noise sample.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub scheme: Scheme,
    pub dts: Vec<f64>,
    /// `‖φ_{dt_k} − φ_{dt_{k+1}}‖_E`
    pub differences: Vec<f64>,
    /// Least-squares slope of `log₂ difference` against `log₂ dt`.
    pub fitted_order: Option<f64>,
}

/// `strides` must be strictly decreasing; step `k` spans `strides[k]` noise
/// samples.
pub fn self_convergence(
    x: &EState,
    noise: &NoiseField,
    t: f64,
    params: &SystemParams,
    f: &dyn Nonlinearity,
    scheme: Scheme,
    strides: &[usize],
) -> Result<ConvergenceStudy> {
    if strides.len() < 3 || strides.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("strides", "need at least three strictly decreasing strides"));
    }
    let finals: Vec<EState> = strides
        .iter()
        .map(|&s| cocycle_phi(t, noise, x, params, f, Integrator::new(scheme, s)))
        .collect::<Result<_>>()?;
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| w[0].distance(&w[1]))
        .collect::<Result<_>>()?;
    let dts: Vec<f64> = strides.iter().map(|&s| s as f64 * noise.grid().dt()).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = dts
        .iter()
        .zip(&differences)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&h, &d)| (h.log2(), d.log2()))
        .unzip();
    Ok(ConvergenceStudy {
        scheme,
        dts,
        differences,
        fitted_order: linear_fit(&xs, &ys).map(|(m, _)| m),
    })
}
