use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{integrate_final, Integrator, Nonlinearity, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::fbm::{path_rng, NoiseField};
use crate::lattice::{EState, LatticeConfig};
use crate::stats::linear_fit;

use super::diameter;

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub horizons: Vec<f64>,
    /// `[horizon][initial state]` states at time 0, serialized as E-norms.
    #[serde(skip)]
    pub states: Vec<Vec<EState>>,
    /// `max_i ‖Ψ_{T_{k+1}}(0) − Ψ_{T_k}(0)‖_E` over initial states.
    pub cauchy: Vec<f64>,
    /// Largest pairwise distance between initial states at each horizon.
    pub spread: Vec<f64>,
    pub initial_diameter: f64,
    /// Deepest-horizon state of the first initial condition.
    #[serde(skip)]
    pub equilibrium: EState,
    /// `−slope` of `log cauchy_k` against `T_k`.
    pub fitted_rate: Option<f64>,
    /// Successive ratios `cauchy_{k+1}/cauchy_k`.
    pub cauchy_ratios: Vec<f64>,
}

impl PullbackReport {
    pub fn deepest(&self) -> &[EState] {
        &self.states[self.states.len() - 1]
    }

    pub fn equilibrium_norm(&self) -> f64 {
        self.equilibrium.e_norm()
    }
}

/// Integrate every initial state from `−T` to 0 for every horizon `T`, all
/// on the same noise path.
pub fn run_pullback(
    params: &SystemParams,
    f: &dyn Nonlinearity,
    noise: &NoiseField,
    inits: &[EState],
    horizons: &[f64],
    integrator: Integrator,
) -> Result<PullbackReport> {
    if inits.is_empty() {
        return Err(invalid("inits", "need at least one initial state"));
    }
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) || horizons[0] <= 0.0 {
        return Err(invalid("horizons", "must be positive and strictly increasing"));
    }
    let deepest = horizons[horizons.len() - 1];
    let g = noise.grid();
    if -deepest < g.t_start() - 1e-9 * g.dt() || !g.contains(0.0) {
        return Err(Error::WindowExceeded {
            lo: -deepest,
            hi: 0.0,
            start: g.t_start(),
            end: g.t_end(),
        });
    }
    let cells: Vec<(usize, usize)> = (0..horizons.len())
        .flat_map(|h| (0..inits.len()).map(move |i| (h, i)))
        .collect();
    let results: Vec<EState> = cells
        .par_iter()
        .map(|&(h, i)| integrate_final(&inits[i], noise, -horizons[h], 0.0, params, f, integrator))
        .collect::<Result<_>>()?;
    let states: Vec<Vec<EState>> = results.chunks(inits.len()).map(|c| c.to_vec()).collect();

    let mut cauchy = Vec::with_capacity(horizons.len().saturating_sub(1));
    for w in states.windows(2) {
        let mut m = 0.0_f64;
        for (a, b) in w[0].iter().zip(&w[1]) {
            m = m.max(a.distance(b)?);
        }
        cauchy.push(m);
    }
    let spread = states.iter().map(|s| diameter(s)).collect::<Result<Vec<_>>>()?;
    let cauchy_ratios = cauchy.windows(2).map(|w| w[1] / w[0]).collect();
    let fitted_rate = {
        let pts: Vec<(f64, f64)> = horizons
            .iter()
            .zip(&cauchy)
            .filter(|(_, &c)| c > 0.0)
            .map(|(&t, &c)| (t, c.ln()))
            .collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        linear_fit(&xs, &ys).map(|(m, _)| -m)
    };
    Ok(PullbackReport {
        horizons: horizons.to_vec(),
        equilibrium: states[states.len() - 1][0].clone(),
        states,
        cauchy,
        spread,
        initial_diameter: diameter(inits)?,
        fitted_rate,
        cauchy_ratios,
    })
}

/// `count ≥ 2` states on the E-sphere of radius `diam/2` around the
/// origin: an antipodal pair along a random direction, then random points,
/// so the set has diameter exactly `diam`.
pub fn spread_states(
    config: LatticeConfig,
    varrho: f64,
    diam: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<EState>> {
    if count < 2 {
        return Err(invalid("count", "need at least two states"));
    }
    let mut rng = path_rng(seed);
    let n = config.n_sites();
    let mut dir = || -> Result<EState> {
        let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = EState::from_raw(config, u, v, varrho);
        let norm = s.e_norm();
        Ok(s.scale(0.5 * diam / norm))
    };
    let first = dir()?;
    let mut out = vec![first.scale(-1.0), first];
    for _ in 2..count {
        out.push(dir()?);
    }
    Ok(out)
}
