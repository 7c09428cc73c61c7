use rand::Rng;
use serde::Serialize;

use super::integrate::Trajectory;
use super::nonlinearity::Nonlinearity;
use crate::error::{invalid, Error, Result};
use crate::fbm::{self, NoiseField};

/// Absolute floating-point slack on the dissipativity inequality.
pub const DISSIPATIVITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub condition: &'static str,
    pub u: f64,
    pub v: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DissipativityReport {
    pub nonlinearity: &'static str,
    pub trials: usize,
    pub range: f64,
    pub gamma: f64,
    pub c_f: f64,
    pub p: u32,
    /// Largest `(f(u)−f(v))(u−v) + γ(u−v)²` seen.
    pub worst_dissipativity_margin: f64,
    pub worst_pair: (f64, f64),
    /// Largest `|f(u)| − c_f(|u|^{2p+1} + 1)` seen.
    pub worst_growth_margin: f64,
    pub worst_growth_point: f64,
    pub violation: Option<Violation>,
    pub pass: bool,
}

impl DissipativityReport {
    pub fn into_result(self) -> Result<Self> {
        match &self.violation {
            None => Ok(self),
            Some(v) => Err(Error::Dissipativity {
                condition: v.condition,
                u: v.u,
                v: v.v,
                margin: v.margin,
            }),
        }
    }
}

/// Randomised check of the one-sided condition and the growth bound with
/// pairs drawn uniformly from `[−range, range]²`.
pub fn check_dissipativity(
    f: &dyn Nonlinearity,
    trials: usize,
    range: f64,
    seed: u64,
) -> Result<DissipativityReport> {
    if trials < 1 {
        return Err(invalid("trials", "need at least one sampled pair"));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(invalid("range", format!("must be > 0, got {range}")));
    }
    let d = f.declared();
    let mut rng = fbm::path_rng(seed);
    let exponent = 2 * d.p as i32 + 1;
    let mut worst_d = f64::NEG_INFINITY;
    let mut worst_pair = (0.0, 0.0);
    let mut worst_g = f64::NEG_INFINITY;
    let mut worst_gu = 0.0;
    for _ in 0..trials {
        let u = rng.random_range(-range..=range);
        let v = rng.random_range(-range..=range);
        let diff = u - v;
        let margin = (f.eval(u) - f.eval(v)) * diff + d.gamma * diff * diff;
        if margin > worst_d {
            worst_d = margin;
            worst_pair = (u, v);
        }
        let growth = f.eval(u).abs() - d.c_f * (u.abs().powi(exponent) + 1.0);
        if growth > worst_g {
            worst_g = growth;
            worst_gu = u;
        }
    }
    let violation = if worst_d > DISSIPATIVITY_SLACK {
        Some(Violation {
            condition: "one-sided dissipativity",
            u: worst_pair.0,
            v: worst_pair.1,
            margin: worst_d,
        })
    } else if worst_g > DISSIPATIVITY_SLACK {
        Some(Violation {
            condition: "polynomial growth",
            u: worst_gu,
            v: worst_gu,
            margin: worst_g,
        })
    } else {
        None
    };
    Ok(DissipativityReport {
        nonlinearity: f.name(),
        trials,
        range,
        gamma: d.gamma,
        c_f: d.c_f,
        p: d.p,
        worst_dissipativity_margin: worst_d,
        worst_pair,
        worst_growth_margin: worst_g,
        worst_growth_point: worst_gu,
        pass: violation.is_none(),
        violation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyBoundReport {
    pub horizon: f64,
    /// `sup_{[t0, t0+T]} ‖Ψ(t)‖²_E`.
    pub sup_energy: f64,
    /// Right-hand bracket (initial energy, supremum of the noise, and the
    /// integrated noise moments) at the full horizon.
    pub bracket: f64,
    /// Smallest `M` with `sup_{[0,s]} ‖Ψ‖² ≤ M · bracket(s)` for all grid `s ≤ T/2`.
    pub m_half: f64,
    /// The same over `s ≤ T`.
    pub m_full: f64,
    /// `m_full ≤ 2 m_half` (or both vanish).
    pub bounded: bool,
}

/// Empirical constant of the a-priori energy estimate along a trajectory.
pub fn energy_bound_check(traj: &Trajectory, noise: &NoiseField) -> Result<EnergyBoundReport> {
    let p = traj.params().p as i32;
    let grid = *traj.grid();
    let energies = traj.e_norm_sq_series();
    let e0 = energies[0].1;
    let half = grid.n_steps() / 2;

    let moment = |n1: f64, n2: f64| n1.powi(2 * p + 1) + n1 + n2 + 1.0;
    let (mut sup_lhs, mut sup_w, mut integral) = (0.0_f64, 0.0_f64, 0.0);
    let (mut m_half, mut m_full) = (0.0_f64, 0.0_f64);
    let mut prev_moment = None;
    let mut bracket = 0.0;
    for (k, &(t, energy)) in energies.iter().enumerate() {
        let (w1, w2) = noise.at(t)?;
        let n1: f64 = w1.iter().map(|x| x * x).sum();
        let n2: f64 = w2.iter().map(|x| x * x).sum();
        let m = moment(n1, n2);
        if let Some(prev) = prev_moment {
            integral += 0.5 * grid.dt() * (prev + m);
        }
        prev_moment = Some(m);
        sup_lhs = sup_lhs.max(energy);
        sup_w = sup_w.max(n1 + n2);
        bracket = e0 + sup_w + integral;
        if bracket > 0.0 {
            let ratio = sup_lhs / bracket;
            m_full = m_full.max(ratio);
            if k <= half {
                m_half = m_half.max(ratio);
            }
        }
    }
    Ok(EnergyBoundReport {
        horizon: grid.t_end() - grid.t_start(),
        sup_energy: sup_lhs,
        bracket,
        m_half,
        m_full,
        bounded: m_full <= 2.0 * m_half || m_full == 0.0,
    })
}
